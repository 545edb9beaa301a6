#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spillprobe/ablation.hpp"
#include "spillprobe/classify.hpp"
#include "spillprobe/config.hpp"

namespace spillprobe {

// Layout of a results directory:
//   config.json                     config snapshot + hash
//   images/<model>/<image_id>.json  one ImageAnalysis each
//   failures.json                   per-model status and failure log
//   timing.json                     wall-clock only, never compared
//   sweep.json                      optional SweepResult

nlohmann::json image_record(const ImageAnalysis& a, const std::string& config_hash);
ImageAnalysis analysis_from_record(const nlohmann::json& j);

struct ModelStatus {
  std::string model;
  std::int64_t attempted = 0;
  std::int64_t failed = 0;
  std::int64_t absent = 0;
  bool valid = true;  // false when more than half the attempted images failed
};

struct FailureRecord {
  std::string model;
  std::string image_id;
  std::string kind;  // "absent" or "error"
  std::string reason;
};

struct LoadedResults {
  ProbeConfig config;
  std::string config_hash;
  std::vector<ImageAnalysis> analyses;  // sorted by (model, image_id)
  std::vector<ModelStatus> statuses;
  std::vector<std::string> problems;    // unreadable or corrupt files
  std::optional<SweepResult> sweep;

  std::vector<std::string> models() const;
};

/// Reads a results directory. Corrupt per-image files are listed in
/// `problems` and skipped. Throws Error when the directory has no images/.
LoadedResults load_results(const std::filesystem::path& dir);

/// Cached (d_norm, s) features of successful analyses, per model.
FeatureSet features_of(const std::vector<ImageAnalysis>& analyses);

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace spillprobe
