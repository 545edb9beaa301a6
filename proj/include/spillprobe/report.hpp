#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "spillprobe/ablation.hpp"
#include "spillprobe/decay.hpp"
#include "spillprobe/metrics.hpp"
#include "spillprobe/results.hpp"

namespace spillprobe {

struct ReportOutput {
  std::vector<std::filesystem::path> written;
  std::vector<std::string> problems;
  std::vector<std::string> notices;
  std::map<std::string, ModelAggregate> aggregates;
  std::map<std::string, DecayProfile> decay;
};

/// Writes main_results.csv, decay_density.csv, semantic_proportion.csv,
/// decay_overflow.csv, decay_curve_<model>.csv and, when the results hold a
/// sweep, ablation_beta.csv, ablation_alpha.csv, ablation_grid.csv and
/// ablation_rankings.csv.
ReportOutput run_report(const std::filesystem::path& results_dir, const std::filesystem::path& out_dir);
ReportOutput export_tables(const LoadedResults& results, const std::filesystem::path& out_dir);

struct SweepOutput {
  SweepResult result;
  std::optional<StabilityReport> stability;  // absent with fewer than 2 models
};

/// Sweeps the cached features of a results directory and writes sweep.json.
SweepOutput run_sweep(const std::filesystem::path& results_dir, const SweepGrid& grid);

// Table formatting shared with the CLI.
std::string format_fixed(double v, int decimals);
std::string format_optional(const std::optional<double>& v, int decimals);
std::string bin_label(const DistanceBin& b);

}  // namespace spillprobe
