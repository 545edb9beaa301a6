#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "spillprobe/classify.hpp"
#include "spillprobe/metrics.hpp"

namespace spillprobe {

struct SweepGrid {
  std::vector<double> betas;
  std::vector<double> alphas;

  /// Throws Error when either list is empty or not strictly ascending.
  void validate() const;
  std::size_t cell_count() const { return betas.size() * alphas.size(); }

  static SweepGrid defaults();
};

/// Cached features, model -> images -> regions.
using FeatureSet = std::map<std::string, std::vector<std::vector<RegionFeature>>>;

struct ModelCell {
  ClassCounts counts;
  WusValue wus;
  std::int64_t wus_valid_images = 0;
};

struct SweepCell {
  double beta = 0.0;
  double alpha = 0.0;
  std::map<std::string, ModelCell> models;
  /// Models by WUS descending; models tied at 1e-9 share a group. N/A models left out.
  std::vector<std::vector<std::string>> ranking;
};

struct SweepResult {
  SweepGrid grid;
  std::vector<std::string> models;  // sorted
  std::vector<SweepCell> cells;     // beta-major, alpha-minor
  std::vector<std::string> warnings;

  const SweepCell& cell(double beta, double alpha) const;
};

/// Reclassifies the cached features at every grid cell. Models without any
/// region features are omitted with a warning.
SweepResult sweep(const FeatureSet& features, const SweepGrid& grid, double epsilon, int min_regions);

/// "a > b = c > d"
std::string format_ranking(const std::vector<std::vector<std::string>>& ranking);

struct StabilityViolation {
  double beta = 0.0;
  double alpha = 0.0;
  std::string ordering;
  std::string reason;
};

struct StabilityReport {
  bool stable = true;
  std::vector<std::string> cell_orderings;  // same order as SweepResult::cells
  std::vector<StabilityViolation> violations;
};

/// Stable iff every pair of models compares the same way (>, <, or tie) in
/// every cell where both have a WUS. Throws Error with fewer than 2 models or cells.
StabilityReport ranking_stability(const SweepResult& result);

void to_json(nlohmann::json& j, const SweepResult& r);
SweepResult sweep_result_from_json(const nlohmann::json& j);

}  // namespace spillprobe
