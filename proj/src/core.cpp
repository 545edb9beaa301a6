#include "spillprobe/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string_view>

#include <fmt/format.h>

namespace spillprobe {

ImageBuf::ImageBuf(int width, int height)
    : ImageBuf(width, height,
               std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                         static_cast<std::size_t>(std::max(height, 0)) *
                                         kChannels)) {}

ImageBuf::ImageBuf(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) {
    throw Error(fmt::format("image dimensions must be positive, got {}x{}", width, height));
  }
  if (data_.size() != pixel_count() * kChannels) {
    throw Error(fmt::format("image buffer holds {} bytes, expected {}", data_.size(),
                            pixel_count() * kChannels));
  }
}

GrayBuf::GrayBuf(int w, int h, double fill)
    : width(w), height(h),
      data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

BinaryMap::BinaryMap(int w, int h, bool fill)
    : width(w), height(h),
      data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill ? 1 : 0) {}

std::size_t BinaryMap::count() const {
  return static_cast<std::size_t>(std::count(data.begin(), data.end(), std::uint8_t{1}));
}

void EditBox::validate() const {
  if (x_min < 0 || y_min < 0 || x_min >= x_max || y_min >= y_max) {
    throw Error(fmt::format("invalid edit box ({},{},{},{})", x_min, y_min, x_max, y_max));
  }
}

void EditBox::validate(int width, int height) const {
  validate();
  if (x_max > width || y_max > height) {
    throw Error(fmt::format("edit box ({},{},{},{}) exceeds image {}x{}", x_min, y_min, x_max,
                            y_max, width, height));
  }
}

Point box_center(const EditBox& box) {
  return {(box.x_min + box.x_max) / 2.0, (box.y_min + box.y_max) / 2.0};
}

double box_diag(const EditBox& box) {
  return std::hypot(static_cast<double>(box.x_max - box.x_min),
                    static_cast<double>(box.y_max - box.y_min));
}

EditBox parse_box(const std::string& text) {
  int values[4];
  std::string_view rest = text;
  for (int i = 0; i < 4; ++i) {
    auto comma = rest.find(',');
    auto field = rest.substr(0, comma);
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), values[i]);
    if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty() ||
        (i < 3 && comma == std::string_view::npos) || (i == 3 && comma != std::string_view::npos)) {
      throw Error(fmt::format("cannot parse edit box '{}': expected x_min,y_min,x_max,y_max", text));
    }
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
  }
  EditBox box{values[0], values[1], values[2], values[3]};
  box.validate();
  return box;
}

}  // namespace spillprobe
