// OpenMP kernels. Rows are independent work items; each output pixel sums
// its taps in the same order as the serial reference.

#include <cmath>

#include <fmt/format.h>

#include "kernels_detail.hpp"

namespace spillprobe::kernels {

GrayBuf to_gray(const ImageBuf& img) {
  GrayBuf out(img.width(), img.height());
  const int w = img.width();
  const int h = img.height();
  const std::uint8_t* src = img.data().data();
  double* dst = out.data.data();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const std::uint8_t* p = src + static_cast<std::size_t>(y) * w * 3;
    double* o = dst + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      o[x] = 0.299 * p[3 * x] + 0.587 * p[3 * x + 1] + 0.114 * p[3 * x + 2];
    }
  }
  return out;
}

GrayBuf gaussian_blur(const GrayBuf& g, double sigma) {
  if (!(sigma > 0.0)) throw Error("blur sigma must be positive");
  const int r = blur_radius(sigma);
  const auto taps = gaussian_taps(sigma, r);
  const double* t = taps.data() + r;  // t[k] for k in [-r, r]
  const int w = g.width;
  const int h = g.height;

  GrayBuf tmp(w, h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const double* in = g.data.data() + static_cast<std::size_t>(y) * w;
    double* out = tmp.data.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      if (x - r >= 0 && x + r < w) {
        for (int k = -r; k <= r; ++k) s += t[k] * in[x + k];
      } else {
        for (int k = -r; k <= r; ++k) s += t[k] * in[reflect_index(x + k, w)];
      }
      out[x] = s;
    }
  }

  GrayBuf result(w, h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    double* out = result.data.data() + static_cast<std::size_t>(y) * w;
    for (int k = -r; k <= r; ++k) {
      const double* in = tmp.data.data() + static_cast<std::size_t>(reflect_index(y + k, h)) * w;
      const double wk = t[k];
      for (int x = 0; x < w; ++x) out[x] += wk * in[x];
    }
  }
  return result;
}

BinaryMap diff_threshold(const GrayBuf& a, const GrayBuf& b, double tau) {
  if (a.width != b.width || a.height != b.height) {
    throw DimensionError(fmt::format("cannot diff {}x{} against {}x{}", a.width, a.height, b.width, b.height));
  }
  BinaryMap m(a.width, a.height);
  const long n = static_cast<long>(a.data.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    m.data[static_cast<std::size_t>(i)] =
        std::abs(a.data[static_cast<std::size_t>(i)] - b.data[static_cast<std::size_t>(i)]) > tau ? 1 : 0;
  }
  return m;
}

SsimMap ssim_map(const GrayBuf& a, const GrayBuf& b, const SsimParams& p) {
  detail::check_ssim_inputs(a, b, p);
  const auto taps = detail::window_taps(p.window, p.sigma);
  const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
  const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);
  const int win = p.window;

  SsimMap map;
  map.width = a.width - win + 1;
  map.height = a.height - win + 1;
  map.center_offset = win / 2;
  map.data.resize(static_cast<std::size_t>(map.width) * map.height);
  const int mw = map.width;

  const std::size_t hsize = static_cast<std::size_t>(mw) * a.height;
  std::vector<double> ha(hsize), hb(hsize), haa(hsize), hbb(hsize), hab(hsize);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < a.height; ++y) {
    const double* ra = a.data.data() + static_cast<std::size_t>(y) * a.width;
    const double* rb = b.data.data() + static_cast<std::size_t>(y) * b.width;
    const std::size_t row = static_cast<std::size_t>(y) * mw;
    for (int x = 0; x < mw; ++x) {
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (int i = 0; i < win; ++i) {
        const double w = taps[static_cast<std::size_t>(i)];
        const double va = ra[x + i];
        const double vb = rb[x + i];
        sa += w * va;
        sb += w * vb;
        saa += w * (va * va);
        sbb += w * (vb * vb);
        sab += w * (va * vb);
      }
      ha[row + x] = sa;
      hb[row + x] = sb;
      haa[row + x] = saa;
      hbb[row + x] = sbb;
      hab[row + x] = sab;
    }
  }

#pragma omp parallel
  {
    std::vector<double> ma(mw), mb(mw), maa(mw), mbb(mw), mab(mw);
#pragma omp for schedule(static)
    for (int y = 0; y < map.height; ++y) {
      std::fill(ma.begin(), ma.end(), 0.0);
      std::fill(mb.begin(), mb.end(), 0.0);
      std::fill(maa.begin(), maa.end(), 0.0);
      std::fill(mbb.begin(), mbb.end(), 0.0);
      std::fill(mab.begin(), mab.end(), 0.0);
      for (int i = 0; i < win; ++i) {
        const double w = taps[static_cast<std::size_t>(i)];
        const std::size_t row = static_cast<std::size_t>(y + i) * mw;
        for (int x = 0; x < mw; ++x) {
          ma[x] += w * ha[row + x];
          mb[x] += w * hb[row + x];
          maa[x] += w * haa[row + x];
          mbb[x] += w * hbb[row + x];
          mab[x] += w * hab[row + x];
        }
      }
      double* out = map.data.data() + static_cast<std::size_t>(y) * mw;
      for (int x = 0; x < mw; ++x) {
        const double va = maa[x] - ma[x] * ma[x];
        const double vb = mbb[x] - mb[x] * mb[x];
        const double cov = mab[x] - ma[x] * mb[x];
        out[x] = ((2.0 * ma[x] * mb[x] + c1) * (2.0 * cov + c2)) /
                 ((ma[x] * ma[x] + mb[x] * mb[x] + c1) * (va + vb + c2));
      }
    }
  }
  return map;
}

}  // namespace spillprobe::kernels
