#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace spillprobe {

/// Base class for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when two rasters that must agree in size do not.
class DimensionError : public Error {
 public:
  using Error::Error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Axis-aligned pixel rectangle, inclusive-min / exclusive-max.
struct Rect {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  int width() const { return x_max - x_min; }
  int height() const { return y_max - y_min; }
  std::int64_t area() const {
    return static_cast<std::int64_t>(width()) * height();
  }
  bool contains(int x, int y) const {
    return x >= x_min && x < x_max && y >= y_min && y < y_max;
  }
  bool empty() const { return x_max <= x_min || y_max <= y_min; }

  friend bool operator==(const Rect&, const Rect&) = default;
};

/// 8-bit RGB raster, row-major, interleaved.
class ImageBuf {
 public:
  static constexpr int kChannels = 3;

  ImageBuf() = default;
  ImageBuf(int width, int height);
  ImageBuf(int width, int height, std::vector<std::uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  bool empty() const { return width_ == 0 || height_ == 0; }

  const std::uint8_t* pixel(int x, int y) const {
    return data_.data() + (static_cast<std::size_t>(y) * width_ + x) * kChannels;
  }
  std::uint8_t* pixel(int x, int y) {
    return data_.data() + (static_cast<std::size_t>(y) * width_ + x) * kChannels;
  }
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    auto* p = pixel(x, y);
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }

  const std::vector<std::uint8_t>& data() const { return data_; }
  std::vector<std::uint8_t>& data() { return data_; }

  friend bool operator==(const ImageBuf&, const ImageBuf&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Single-channel real-valued raster on the 0..255 scale.
struct GrayBuf {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  GrayBuf() = default;
  GrayBuf(int w, int h, double fill = 0.0);

  double at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  double& at(int x, int y) {
    return data[static_cast<std::size_t>(y) * width + x];
  }
};

/// One byte per pixel, 0 or 1.
struct BinaryMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  BinaryMap() = default;
  BinaryMap(int w, int h, bool fill = false);

  bool at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x] != 0;
  }
  void set(int x, int y, bool v) {
    data[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
  }
  std::size_t count() const;

  friend bool operator==(const BinaryMap&, const BinaryMap&) = default;
};

/// The annotated edit rectangle. Same pixel convention as Rect.
struct EditBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  Rect rect() const { return {x_min, y_min, x_max, y_max}; }
  bool contains(int x, int y) const { return rect().contains(x, y); }
  std::int64_t area() const { return rect().area(); }

  /// Throws Error unless 0 <= min < max <= extent on both axes.
  void validate(int width, int height) const;
  /// Throws Error when the box is empty or has negative origin.
  void validate() const;

  friend bool operator==(const EditBox&, const EditBox&) = default;
};

Point box_center(const EditBox& box);
double box_diag(const EditBox& box);

/// Parses "x_min,y_min,x_max,y_max".
EditBox parse_box(const std::string& text);

}  // namespace spillprobe
