#pragma once

#include <cstdint>
#include <vector>

#include "spillprobe/config.hpp"
#include "spillprobe/core.hpp"
#include "spillprobe/kernels.hpp"

namespace spillprobe {

/// Horizontal run of member pixels [x_begin, x_end) on row y.
struct PixelRun {
  int y = 0;
  int x_begin = 0;
  int x_end = 0;

  friend bool operator==(const PixelRun&, const PixelRun&) = default;
};

/// One 8-connected component of the spill map.
struct RegionRaw {
  int label = 0;               // 1-based, in output order
  std::vector<PixelRun> runs;  // row-major order
  std::int64_t area = 0;
  Rect bbox;                   // tight, exclusive max
  Point centroid;              // mean of member (x, y) integer coordinates

  template <typename Fn>
  void for_each_pixel(Fn&& fn) const {
    for (const auto& run : runs) {
      for (int x = run.x_begin; x < run.x_end; ++x) fn(x, run.y);
    }
  }
};

struct DetectionResult {
  BinaryMap spill_map;  // thresholded and masked
  std::vector<RegionRaw> regions;
  double spill_rate = 0.0;
  double ssim_non_edit = 1.0;
  std::int64_t non_edit_pixel_count = 0;
  std::int64_t spill_pixel_count = 0;
  std::vector<double> distances;  // per region, centroid to box center in pixels
};

// Stage functions. to_gray / gaussian_blur / diff_threshold forward to the
// OpenMP kernels.
GrayBuf to_gray(const ImageBuf& img);
GrayBuf gaussian_blur(const GrayBuf& g, double sigma);
BinaryMap diff_threshold(const GrayBuf& a, const GrayBuf& b, double tau);

/// Clears every pixel inside the box. Throws if the box exceeds the map.
BinaryMap mask_edit_box(const BinaryMap& m, const EditBox& box);

/// Maximal 8-connected components with area >= min_area, ordered by area
/// descending, then bbox (y_min, x_min), then first pixel.
std::vector<RegionRaw> connected_components(const BinaryMap& m, int min_area);

/// Changed pixels outside the box over all pixels outside the box. Pixels
/// inside the box are ignored, so masking beforehand is optional.
/// Throws when the box covers the whole image.
double spill_rate(const BinaryMap& m, const EditBox& box);

/// Mean of the local SSIM map over window centers outside the box, computed
/// on unblurred luma.
double ssim_non_edit(const ImageBuf& orig, const ImageBuf& gen, const EditBox& box,
                     const kernels::SsimParams& params = {});
/// Same, from precomputed luma.
double ssim_non_edit(const GrayBuf& orig, const GrayBuf& gen, const EditBox& box,
                     const kernels::SsimParams& params = {});

DetectionResult detect(const ImageBuf& orig, const ImageBuf& gen, const EditBox& box, const ProbeConfig& cfg);

}  // namespace spillprobe
