#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "spillprobe/classify.hpp"

namespace spillprobe {

/// Regions whose normalized distance falls in [lo, hi).
struct DistanceBin {
  double lo = 0.0;
  double hi = 0.0;
  std::int64_t area_total = 0;
  std::int64_t region_count = 0;
  std::int64_t semantic_count = 0;  // class == semantic
  std::int64_t related_count = 0;   // similarity > beta, any distance

  double midpoint() const { return 0.5 * (lo + hi); }
};

struct BinnedRegions {
  std::vector<DistanceBin> bins;
  std::int64_t overflow_count = 0;  // d_norm >= last edge
  std::int64_t overflow_area = 0;
};

struct DecayProfile {
  std::vector<DistanceBin> bins;
  std::vector<double> density_raw;                        // area / annulus area, radii in diagonal units
  std::vector<std::optional<double>> density_normalized;  // percent of the reference bin
  std::vector<std::optional<double>> semantic_proportion; // percent of related regions; nullopt if empty
  std::optional<std::size_t> reference_bin;               // first non-empty bin
  bool all_empty = true;
  std::int64_t overflow_count = 0;
  std::int64_t overflow_area = 0;
};

/// Throws Error unless edges are strictly increasing from 0 with at least two entries.
void validate_bin_edges(std::span<const double> edges);

BinnedRegions bin_regions(std::span<const SpilloverRegion> regions, std::span<const double> edges, double beta);

/// Area density per annulus, normalized to the first non-empty bin = 100.
/// With every bin empty, all normalized densities are undefined and all_empty is set.
DecayProfile annular_density(const BinnedRegions& binned);

/// 100 * |{s > beta}| / count per bin; undefined for empty bins.
std::vector<std::optional<double>> semantic_proportion_by_bin(std::span<const SpilloverRegion> regions,
                                                              std::span<const double> edges, double beta);

/// bin_regions + annular_density + semantic_proportion_by_bin.
DecayProfile decay_profile(std::span<const SpilloverRegion> regions, std::span<const double> edges, double beta);

}  // namespace spillprobe
