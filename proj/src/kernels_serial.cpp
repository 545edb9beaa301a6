// Serial reference kernels. Deliberately plain loop nests.

#include <cmath>

#include <fmt/format.h>

#include "kernels_detail.hpp"

namespace spillprobe::kernels {

std::vector<double> gaussian_taps(double sigma, int radius) {
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double w = std::exp(-(static_cast<double>(k) * k) / (2.0 * sigma * sigma));
    taps[static_cast<std::size_t>(k + radius)] = w;
    sum += w;
  }
  for (auto& w : taps) w /= sum;
  return taps;
}

int blur_radius(double sigma) { return static_cast<int>(std::ceil(3.0 * sigma)); }

namespace detail {

std::vector<double> window_taps(int window, double sigma) {
  std::vector<double> taps(static_cast<std::size_t>(window));
  const double center = (window - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < window; ++i) {
    const double d = i - center;
    taps[static_cast<std::size_t>(i)] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    sum += taps[static_cast<std::size_t>(i)];
  }
  for (auto& w : taps) w /= sum;
  return taps;
}

void check_ssim_inputs(const GrayBuf& a, const GrayBuf& b, const SsimParams& p) {
  if (a.width != b.width || a.height != b.height) {
    throw DimensionError(fmt::format("SSIM inputs differ in size: {}x{} vs {}x{}", a.width, a.height, b.width,
                                     b.height));
  }
  if (p.window < 1 || !(p.sigma > 0.0)) throw Error("SSIM window must be >= 1 with positive sigma");
  if (a.width < p.window || a.height < p.window) {
    throw Error(fmt::format("image {}x{} is smaller than the {}x{} SSIM window", a.width, a.height, p.window,
                            p.window));
  }
}

}  // namespace detail

namespace serial {

GrayBuf to_gray(const ImageBuf& img) {
  GrayBuf out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const auto* p = img.pixel(x, y);
      out.at(x, y) = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    }
  }
  return out;
}

GrayBuf gaussian_blur(const GrayBuf& g, double sigma) {
  if (!(sigma > 0.0)) throw Error("blur sigma must be positive");
  const int r = blur_radius(sigma);
  const auto taps = gaussian_taps(sigma, r);
  GrayBuf tmp(g.width, g.height);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      double s = 0.0;
      for (int k = -r; k <= r; ++k) {
        s += taps[static_cast<std::size_t>(k + r)] * g.at(reflect_index(x + k, g.width), y);
      }
      tmp.at(x, y) = s;
    }
  }
  GrayBuf out(g.width, g.height);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      double s = 0.0;
      for (int k = -r; k <= r; ++k) {
        s += taps[static_cast<std::size_t>(k + r)] * tmp.at(x, reflect_index(y + k, g.height));
      }
      out.at(x, y) = s;
    }
  }
  return out;
}

BinaryMap diff_threshold(const GrayBuf& a, const GrayBuf& b, double tau) {
  if (a.width != b.width || a.height != b.height) {
    throw DimensionError(fmt::format("cannot diff {}x{} against {}x{}", a.width, a.height, b.width, b.height));
  }
  BinaryMap m(a.width, a.height);
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    m.data[i] = std::abs(a.data[i] - b.data[i]) > tau ? 1 : 0;
  }
  return m;
}

SsimMap ssim_map(const GrayBuf& a, const GrayBuf& b, const SsimParams& p) {
  detail::check_ssim_inputs(a, b, p);
  const auto taps = detail::window_taps(p.window, p.sigma);
  const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
  const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);

  SsimMap map;
  map.width = a.width - p.window + 1;
  map.height = a.height - p.window + 1;
  map.center_offset = p.window / 2;
  map.data.resize(static_cast<std::size_t>(map.width) * map.height);

  // Horizontal pass of the five moments over every row.
  const std::size_t hsize = static_cast<std::size_t>(map.width) * a.height;
  std::vector<double> ha(hsize), hb(hsize), haa(hsize), hbb(hsize), hab(hsize);
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (int i = 0; i < p.window; ++i) {
        const double w = taps[static_cast<std::size_t>(i)];
        const double va = a.at(x + i, y);
        const double vb = b.at(x + i, y);
        sa += w * va;
        sb += w * vb;
        saa += w * (va * va);
        sbb += w * (vb * vb);
        sab += w * (va * vb);
      }
      const std::size_t o = static_cast<std::size_t>(y) * map.width + x;
      ha[o] = sa;
      hb[o] = sb;
      haa[o] = saa;
      hbb[o] = sbb;
      hab[o] = sab;
    }
  }
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      double ma = 0, mb = 0, maa = 0, mbb = 0, mab = 0;
      for (int i = 0; i < p.window; ++i) {
        const double w = taps[static_cast<std::size_t>(i)];
        const std::size_t o = static_cast<std::size_t>(y + i) * map.width + x;
        ma += w * ha[o];
        mb += w * hb[o];
        maa += w * haa[o];
        mbb += w * hbb[o];
        mab += w * hab[o];
      }
      const double va = maa - ma * ma;
      const double vb = mbb - mb * mb;
      const double cov = mab - ma * mb;
      map.data[static_cast<std::size_t>(y) * map.width + x] =
          ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
  }
  return map;
}

}  // namespace serial
}  // namespace spillprobe::kernels
