#pragma once

// Pixel kernels behind the detection stage.
//
// Every kernel has two builds: the OpenMP one in namespace `kernels`, used by
// the pipeline, and a plain serial one in `kernels::serial`, kept as the
// reference the parallel build is tested and benchmarked against. Both walk
// the filter taps in the same order, so their outputs are bitwise equal.

#include <vector>

#include "spillprobe/core.hpp"

namespace spillprobe::kernels {

/// Taps of a normalized 1-D Gaussian on [-radius, radius].
std::vector<double> gaussian_taps(double sigma, int radius);

/// ceil(3 sigma).
int blur_radius(double sigma);

/// Half-sample symmetric reflection (d c b a | a b c d | d c b a),
/// valid for any i and any n >= 1.
inline int reflect_index(int i, int n) {
  const int period = 2 * n;
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;
};

/// Local SSIM values over every full window position ("valid" filtering).
/// Entry (i, j) is the window whose top-left pixel is (j, i); its center
/// pixel is (j + window / 2, i + window / 2).
struct SsimMap {
  int width = 0;
  int height = 0;
  int center_offset = 0;
  std::vector<double> data;

  double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

/// BT.601 luma, 0.299 R + 0.587 G + 0.114 B.
GrayBuf to_gray(const ImageBuf& img);
/// Separable Gaussian, radius ceil(3 sigma), reflect borders.
GrayBuf gaussian_blur(const GrayBuf& g, double sigma);
/// Pixel set iff |a - b| > tau. Throws DimensionError on size mismatch.
BinaryMap diff_threshold(const GrayBuf& a, const GrayBuf& b, double tau);
/// Throws Error when either side is smaller than the window.
SsimMap ssim_map(const GrayBuf& a, const GrayBuf& b, const SsimParams& params = {});

namespace serial {

GrayBuf to_gray(const ImageBuf& img);
GrayBuf gaussian_blur(const GrayBuf& g, double sigma);
BinaryMap diff_threshold(const GrayBuf& a, const GrayBuf& b, double tau);
SsimMap ssim_map(const GrayBuf& a, const GrayBuf& b, const SsimParams& params = {});

}  // namespace serial

}  // namespace spillprobe::kernels
