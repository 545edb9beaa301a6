#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "spillprobe/core.hpp"

namespace spillprobe {

class ImageIoError : public Error {
 public:
  using Error::Error;
};

struct ImageSize {
  int width = 0;
  int height = 0;
};

/// Decodes a PNG or JPEG file (detected by signature) to 8-bit RGB.
/// Gray and alpha inputs are expanded / dropped.
ImageBuf read_image(const std::filesystem::path& path);

/// Reads only the header.
ImageSize read_image_size(const std::filesystem::path& path);

/// Lossless PNG encoding. `compression` is the zlib level, 0..9.
std::vector<std::uint8_t> encode_png(const ImageBuf& img, int compression = 6);
ImageBuf decode_png(std::span<const std::uint8_t> bytes);
ImageBuf decode_jpeg(std::span<const std::uint8_t> bytes);

void write_png(const std::filesystem::path& path, const ImageBuf& img, int compression = 6);

}  // namespace spillprobe
