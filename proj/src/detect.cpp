#include "spillprobe/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include <fmt/format.h>

namespace spillprobe {
namespace {

class UnionFind {
 public:
  int make() {
    parent_.push_back(static_cast<int>(parent_.size()));
    return parent_.back();
  }
  int find(int a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) parent_[b] = a;
    else parent_[a] = b;
  }
  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<int> parent_;
};

struct Accum {
  std::int64_t area = 0;
  std::int64_t sum_x = 0;
  std::int64_t sum_y = 0;
  Rect bbox{0, 0, 0, 0};
  std::vector<PixelRun> runs;
};

}  // namespace

GrayBuf to_gray(const ImageBuf& img) { return kernels::to_gray(img); }

GrayBuf gaussian_blur(const GrayBuf& g, double sigma) { return kernels::gaussian_blur(g, sigma); }

BinaryMap diff_threshold(const GrayBuf& a, const GrayBuf& b, double tau) {
  return kernels::diff_threshold(a, b, tau);
}

BinaryMap mask_edit_box(const BinaryMap& m, const EditBox& box) {
  box.validate(m.width, m.height);
  BinaryMap out = m;
  for (int y = box.y_min; y < box.y_max; ++y) {
    auto row = out.data.begin() + static_cast<long>(y) * m.width;
    std::fill(row + box.x_min, row + box.x_max, std::uint8_t{0});
  }
  return out;
}

std::vector<RegionRaw> connected_components(const BinaryMap& m, int min_area) {
  const int w = m.width;
  const int h = m.height;
  std::vector<int> labels(static_cast<std::size_t>(w) * h, -1);
  UnionFind uf;

  // First pass: provisional labels from the already-visited 8-neighbours.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!m.at(x, y)) continue;
      int label = -1;
      auto visit = [&](int nx, int ny) {
        if (nx < 0 || nx >= w || ny < 0) return;
        const int n = labels[static_cast<std::size_t>(ny) * w + nx];
        if (n < 0) return;
        if (label < 0) label = n;
        else uf.unite(label, n);
      };
      visit(x - 1, y);
      visit(x - 1, y - 1);
      visit(x, y - 1);
      visit(x + 1, y - 1);
      if (label < 0) label = uf.make();
      labels[static_cast<std::size_t>(y) * w + x] = label;
    }
  }

  // Second pass: resolve roots and gather features.
  std::vector<int> compact(uf.size(), -1);
  std::vector<Accum> comps;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int provisional = labels[static_cast<std::size_t>(y) * w + x];
      if (provisional < 0) continue;
      const int root = uf.find(provisional);
      if (compact[root] < 0) {
        compact[root] = static_cast<int>(comps.size());
        Accum a;
        a.bbox = {x, y, x + 1, y + 1};
        comps.push_back(std::move(a));
      }
      Accum& c = comps[static_cast<std::size_t>(compact[root])];
      ++c.area;
      c.sum_x += x;
      c.sum_y += y;
      c.bbox.x_min = std::min(c.bbox.x_min, x);
      c.bbox.y_min = std::min(c.bbox.y_min, y);
      c.bbox.x_max = std::max(c.bbox.x_max, x + 1);
      c.bbox.y_max = std::max(c.bbox.y_max, y + 1);
      if (!c.runs.empty() && c.runs.back().y == y && c.runs.back().x_end == x) {
        ++c.runs.back().x_end;
      } else {
        c.runs.push_back({y, x, x + 1});
      }
    }
  }

  std::vector<RegionRaw> regions;
  for (auto& c : comps) {
    if (c.area < min_area) continue;
    RegionRaw r;
    r.area = c.area;
    r.bbox = c.bbox;
    r.centroid = {static_cast<double>(c.sum_x) / static_cast<double>(c.area),
                  static_cast<double>(c.sum_y) / static_cast<double>(c.area)};
    r.runs = std::move(c.runs);
    regions.push_back(std::move(r));
  }
  std::sort(regions.begin(), regions.end(), [](const RegionRaw& a, const RegionRaw& b) {
    if (a.area != b.area) return a.area > b.area;
    return std::tie(a.bbox.y_min, a.bbox.x_min, a.runs.front().y, a.runs.front().x_begin) <
           std::tie(b.bbox.y_min, b.bbox.x_min, b.runs.front().y, b.runs.front().x_begin);
  });
  for (std::size_t i = 0; i < regions.size(); ++i) regions[i].label = static_cast<int>(i) + 1;
  return regions;
}

double spill_rate(const BinaryMap& m, const EditBox& box) {
  box.validate(m.width, m.height);
  const std::int64_t total = static_cast<std::int64_t>(m.width) * m.height;
  const std::int64_t outside = total - box.area();
  if (outside <= 0) throw Error("edit box covers the whole image; spill rate undefined");
  std::int64_t changed = 0;
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      if (m.at(x, y) && !box.contains(x, y)) ++changed;
    }
  }
  return static_cast<double>(changed) / static_cast<double>(outside);
}

double ssim_non_edit(const GrayBuf& orig, const GrayBuf& gen, const EditBox& box,
                     const kernels::SsimParams& params) {
  const auto map = kernels::ssim_map(orig, gen, params);
  const int off = map.center_offset;
  // Per-row partial sums keep the reduction order fixed for any thread count.
  std::vector<double> row_sum(static_cast<std::size_t>(map.height), 0.0);
  std::vector<std::int64_t> row_count(static_cast<std::size_t>(map.height), 0);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < map.height; ++y) {
    double s = 0.0;
    std::int64_t n = 0;
    for (int x = 0; x < map.width; ++x) {
      if (box.contains(x + off, y + off)) continue;
      s += map.at(x, y);
      ++n;
    }
    row_sum[static_cast<std::size_t>(y)] = s;
    row_count[static_cast<std::size_t>(y)] = n;
  }
  const double total = std::accumulate(row_sum.begin(), row_sum.end(), 0.0);
  const std::int64_t count = std::accumulate(row_count.begin(), row_count.end(), std::int64_t{0});
  if (count == 0) throw Error("no SSIM window is centered outside the edit box");
  return total / static_cast<double>(count);
}

double ssim_non_edit(const ImageBuf& orig, const ImageBuf& gen, const EditBox& box,
                     const kernels::SsimParams& params) {
  if (orig.width() != gen.width() || orig.height() != gen.height()) {
    throw DimensionError(fmt::format("image sizes differ: {}x{} vs {}x{}", orig.width(), orig.height(),
                                     gen.width(), gen.height()));
  }
  box.validate(orig.width(), orig.height());
  return ssim_non_edit(kernels::to_gray(orig), kernels::to_gray(gen), box, params);
}

DetectionResult detect(const ImageBuf& orig, const ImageBuf& gen, const EditBox& box, const ProbeConfig& cfg) {
  if (orig.width() != gen.width() || orig.height() != gen.height()) {
    throw DimensionError(fmt::format("original is {}x{} but generated is {}x{}", orig.width(), orig.height(),
                                     gen.width(), gen.height()));
  }
  box.validate(orig.width(), orig.height());

  const GrayBuf gray_orig = kernels::to_gray(orig);
  const GrayBuf gray_gen = kernels::to_gray(gen);
  const GrayBuf blur_orig = kernels::gaussian_blur(gray_orig, cfg.sigma);
  const GrayBuf blur_gen = kernels::gaussian_blur(gray_gen, cfg.sigma);

  DetectionResult result;
  result.spill_map = mask_edit_box(kernels::diff_threshold(blur_orig, blur_gen, cfg.tau), box);
  result.regions = connected_components(result.spill_map, cfg.min_area);

  result.non_edit_pixel_count = static_cast<std::int64_t>(orig.pixel_count()) - box.area();
  if (result.non_edit_pixel_count <= 0) throw Error("edit box covers the whole image; spill rate undefined");
  result.spill_pixel_count = static_cast<std::int64_t>(result.spill_map.count());
  result.spill_rate =
      static_cast<double>(result.spill_pixel_count) / static_cast<double>(result.non_edit_pixel_count);
  result.ssim_non_edit = ssim_non_edit(gray_orig, gray_gen, box);

  const Point center = box_center(box);
  result.distances.reserve(result.regions.size());
  for (const auto& r : result.regions) {
    result.distances.push_back(std::hypot(r.centroid.x - center.x, r.centroid.y - center.y));
  }
  return result;
}

}  // namespace spillprobe
