#include "spillprobe/image_io.hpp"

#include <array>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>
#include <jpeglib.h>
#include <png.h>

namespace spillprobe {
namespace {

constexpr std::array<std::uint8_t, 8> kPngSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError(fmt::format("cannot open image {}", path.string()));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool is_png(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= kPngSignature.size() &&
         std::equal(kPngSignature.begin(), kPngSignature.end(), bytes.begin());
}

bool is_jpeg(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// Runs the libjpeg decompressor up to the header (and optionally the pixels).
// Kept free of C++ objects with destructors between setjmp and longjmp.
bool jpeg_decode(std::span<const std::uint8_t> bytes, bool header_only, int* width, int* height,
                 std::uint8_t* out, std::size_t out_size, char* message) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager jerr;
  cinfo.err = jpeg_std_error(&jerr.base);
  jerr.base.error_exit = jpeg_error_exit;
  if (setjmp(jerr.jump)) {
    std::strncpy(message, jerr.message, JMSG_LENGTH_MAX);
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  *width = static_cast<int>(cinfo.image_width);
  *height = static_cast<int>(cinfo.image_height);
  if (!header_only) {
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    const std::size_t stride = static_cast<std::size_t>(cinfo.output_width) * 3;
    if (stride * cinfo.output_height > out_size) {
      std::strncpy(message, "output buffer too small", JMSG_LENGTH_MAX);
      jpeg_destroy_decompress(&cinfo);
      return false;
    }
    while (cinfo.output_scanline < cinfo.output_height) {
      JSAMPROW row = out + stride * cinfo.output_scanline;
      jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
  }
  jpeg_destroy_decompress(&cinfo);
  return true;
}

}  // namespace

ImageBuf decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw ImageIoError(fmt::format("PNG decode failed: {}", image.message));
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw ImageIoError(fmt::format("PNG decode failed: {}", msg));
  }
  return ImageBuf(static_cast<int>(image.width), static_cast<int>(image.height),
                  std::move(pixels));
}

ImageBuf decode_jpeg(std::span<const std::uint8_t> bytes) {
  int width = 0;
  int height = 0;
  char message[JMSG_LENGTH_MAX] = {};
  if (!jpeg_decode(bytes, true, &width, &height, nullptr, 0, message)) {
    throw ImageIoError(fmt::format("JPEG decode failed: {}", message));
  }
  if (width < 1 || height < 1) throw ImageIoError("JPEG has empty dimensions");
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height * 3);
  if (!jpeg_decode(bytes, false, &width, &height, pixels.data(), pixels.size(), message)) {
    throw ImageIoError(fmt::format("JPEG decode failed: {}", message));
  }
  return ImageBuf(width, height, std::move(pixels));
}

ImageBuf read_image(const std::filesystem::path& path) {
  auto bytes = slurp(path);
  try {
    if (is_png(bytes)) return decode_png(bytes);
    if (is_jpeg(bytes)) return decode_jpeg(bytes);
  } catch (const ImageIoError& e) {
    throw ImageIoError(fmt::format("{}: {}", path.string(), e.what()));
  }
  throw ImageIoError(fmt::format("{}: not a PNG or JPEG file", path.string()));
}

ImageSize read_image_size(const std::filesystem::path& path) {
  auto bytes = slurp(path);
  if (is_png(bytes)) {
    // IHDR is always the first chunk: signature(8) length(4) type(4) width(4) height(4).
    if (bytes.size() < 24 || std::memcmp(bytes.data() + 12, "IHDR", 4) != 0) {
      throw ImageIoError(fmt::format("{}: truncated PNG header", path.string()));
    }
    auto be32 = [&](std::size_t off) {
      return static_cast<int>((std::uint32_t{bytes[off]} << 24) | (std::uint32_t{bytes[off + 1]} << 16) |
                              (std::uint32_t{bytes[off + 2]} << 8) | std::uint32_t{bytes[off + 3]});
    };
    return {be32(16), be32(20)};
  }
  if (is_jpeg(bytes)) {
    ImageSize size;
    char message[JMSG_LENGTH_MAX] = {};
    if (!jpeg_decode(bytes, true, &size.width, &size.height, nullptr, 0, message)) {
      throw ImageIoError(fmt::format("{}: {}", path.string(), message));
    }
    return size;
  }
  throw ImageIoError(fmt::format("{}: not a PNG or JPEG file", path.string()));
}

std::vector<std::uint8_t> encode_png(const ImageBuf& img, int compression) {
  if (compression < 0 || compression > 9) throw ImageIoError("PNG compression level must be 0..9");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw ImageIoError("PNG encode failed: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw ImageIoError("PNG encode failed: out of memory");
  }

  std::vector<std::uint8_t> out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw ImageIoError("PNG encode failed");
  }
  png_set_write_fn(
      png, &out,
      [](png_structp p, png_bytep data, png_size_t n) {
        auto* buf = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
        buf->insert(buf->end(), data, data + n);
      },
      nullptr);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, compression);
  // Row filtering costs more than it saves at the fast levels.
  png_set_filter(png, 0, compression <= 3 ? PNG_FILTER_NONE : PNG_ALL_FILTERS);
  png_write_info(png, info);
  const auto stride = static_cast<std::size_t>(img.width()) * ImageBuf::kChannels;
  for (int y = 0; y < img.height(); ++y) {
    png_write_row(png, const_cast<png_bytep>(img.data().data() + static_cast<std::size_t>(y) * stride));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void write_png(const std::filesystem::path& path, const ImageBuf& img, int compression) {
  auto bytes = encode_png(img, compression);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageIoError(fmt::format("cannot write {}", path.string()));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ImageIoError(fmt::format("short write to {}", path.string()));
}

}  // namespace spillprobe
