#include "spillprobe/decay.hpp"

#include <algorithm>
#include <numbers>

namespace spillprobe {

void validate_bin_edges(std::span<const double> edges) {
  if (edges.size() < 2 || edges.front() != 0.0) throw Error("distance bins need at least two edges, starting at 0");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) throw Error("distance bin edges must be strictly increasing");
  }
}

BinnedRegions bin_regions(std::span<const SpilloverRegion> regions, std::span<const double> edges, double beta) {
  validate_bin_edges(edges);
  BinnedRegions out;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) out.bins.push_back({edges[i], edges[i + 1]});

  for (const auto& r : regions) {
    if (r.d_norm >= edges.back()) {
      ++out.overflow_count;
      out.overflow_area += r.area;
      continue;
    }
    // First edge strictly greater than d marks the end of its bin.
    const auto it = std::upper_bound(edges.begin(), edges.end(), r.d_norm);
    const auto k = static_cast<std::size_t>(std::distance(edges.begin(), it)) - 1;
    auto& bin = out.bins[k];
    bin.area_total += r.area;
    ++bin.region_count;
    if (r.cls == RegionClass::kSemantic) ++bin.semantic_count;
    if (r.similarity > beta) ++bin.related_count;
  }
  return out;
}

DecayProfile annular_density(const BinnedRegions& binned) {
  if (binned.bins.empty()) throw Error("no distance bins");
  DecayProfile p;
  p.bins = binned.bins;
  p.overflow_count = binned.overflow_count;
  p.overflow_area = binned.overflow_area;

  for (std::size_t k = 0; k < p.bins.size(); ++k) {
    const auto& b = p.bins[k];
    const double annulus = std::numbers::pi * (b.hi * b.hi - b.lo * b.lo);
    p.density_raw.push_back(static_cast<double>(b.area_total) / annulus);
    if (!p.reference_bin && b.region_count > 0 && b.area_total > 0) p.reference_bin = k;
    p.semantic_proportion.push_back(
        b.region_count > 0
            ? std::optional<double>(100.0 * static_cast<double>(b.related_count) / static_cast<double>(b.region_count))
            : std::nullopt);
  }
  p.all_empty = !p.reference_bin.has_value();
  p.density_normalized.assign(p.bins.size(), std::nullopt);
  if (p.reference_bin) {
    const double ref = p.density_raw[*p.reference_bin];
    for (std::size_t k = 0; k < p.bins.size(); ++k) {
      p.density_normalized[k] = k == *p.reference_bin ? 100.0 : 100.0 * p.density_raw[k] / ref;
    }
  }
  return p;
}

std::vector<std::optional<double>> semantic_proportion_by_bin(std::span<const SpilloverRegion> regions,
                                                              std::span<const double> edges, double beta) {
  return annular_density(bin_regions(regions, edges, beta)).semantic_proportion;
}

DecayProfile decay_profile(std::span<const SpilloverRegion> regions, std::span<const double> edges, double beta) {
  return annular_density(bin_regions(regions, edges, beta));
}

}  // namespace spillprobe
