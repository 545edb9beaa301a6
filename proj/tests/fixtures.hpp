#pragma once

// Planted-structure fixtures shared by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "spillprobe/ablation.hpp"
#include "spillprobe/classify.hpp"
#include "spillprobe/detect.hpp"

namespace fixtures {

namespace sp = spillprobe;

/// Every pixel changes independently with probability p; the edit box sits at
/// the image center and is masked out. Regions come from the real component
/// stage. The box is long and thin so it removes little of the innermost bin.
struct UniformField {
  sp::EditBox box;
  std::vector<sp::SpilloverRegion> regions;
};

inline UniformField uniform_field(int box_w, int box_h, double reach, double p, std::uint64_t seed) {
  const double diag = std::hypot(box_w, box_h);
  const int half = static_cast<int>(std::ceil(reach * diag)) + 2;
  const int size = 2 * half;
  UniformField out;
  out.box = {half - box_w / 2, half - box_h / 2, half - box_w / 2 + box_w, half - box_h / 2 + box_h};

  std::mt19937_64 rng(seed);
  sp::BinaryMap m(size, size);
  for (auto& v : m.data) v = (static_cast<double>(rng() >> 11) * 0x1.0p-53) < p ? 1 : 0;
  m = sp::mask_edit_box(m, out.box);
  for (const auto& r : sp::connected_components(m, 1)) {
    sp::SpilloverRegion s;
    s.bbox = r.bbox;
    s.centroid = r.centroid;
    s.area = r.area;
    s.d_norm = sp::normalized_distance(r.centroid, out.box);
    s.d_pixels = s.d_norm * diag;
    out.regions.push_back(s);
  }
  return out;
}

/// Marks every other region (in distance order) related, so each bin holds a
/// 50% related share up to one region.
inline void plant_half_related(std::vector<sp::SpilloverRegion>& regions, double alpha, double beta) {
  std::vector<std::size_t> order(regions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return regions[a].d_norm < regions[b].d_norm;
  });
  for (std::size_t k = 0; k < order.size(); ++k) {
    auto& r = regions[order[k]];
    r.similarity = k % 2 == 0 ? 0.95 : 0.40;
    r.cls = sp::classify_region(r.d_norm, r.similarity, alpha, beta);
  }
}

/// Five models whose images share one distance layout and differ only in how
/// many regions are related. Even slots sit near the box (d < 0.9), odd slots
/// far (d > 2.1), so every alpha in [1, 2] splits them the same way, and
/// related similarities clear every beta up to 0.9. With n related regions,
/// ceil(n/2) go far and floor(n/2) go near, which makes WUS strictly
/// increasing in n at every cell of the default grid.
inline sp::FeatureSet ordered_models(int images, std::uint64_t seed) {
  constexpr int kRegions = 20;
  const std::vector<std::pair<std::string, int>> related = {
      {"m1_low", 4}, {"m2", 7}, {"m3", 10}, {"m4", 13}, {"m5_high", 16}};
  std::mt19937_64 rng(seed);
  auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  sp::FeatureSet out;
  for (int img = 0; img < images; ++img) {
    std::vector<double> d(kRegions), s_rel(kRegions), s_unrel(kRegions);
    for (std::size_t k = 0; k < kRegions; ++k) {
      d[k] = k % 2 == 0 ? 0.2 + 0.7 * u() : 2.1 + 3.0 * u();
      s_rel[k] = 0.91 + 0.08 * u();
      s_unrel[k] = 0.1 + 0.5 * u();
    }
    for (const auto& [model, n] : related) {
      const int far_related = (n + 1) / 2;
      const int near_related = n / 2;
      std::vector<sp::RegionFeature> f;
      for (std::size_t k = 0; k < kRegions; ++k) {
        const int slot = static_cast<int>(k / 2);
        const bool rel = k % 2 == 1 ? slot < far_related : slot < near_related;
        f.push_back({d[k], rel ? s_rel[k] : s_unrel[k]});
      }
      out[model].push_back(std::move(f));
    }
  }
  return out;
}

}  // namespace fixtures
