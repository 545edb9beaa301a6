#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spillprobe/ablation.hpp"
#include "spillprobe/decay.hpp"
#include "spillprobe/metrics.hpp"
#include "spillprobe/results.hpp"

namespace spillprobe {

struct BatchOptions {
  int workers = 8;
  std::optional<SweepGrid> sweep;  // also run the ablation sweep
  bool export_tables = true;       // write <out>/tables via run_report
};

struct RunReport {
  ProbeConfig config;
  std::string config_hash;
  std::vector<ImageAnalysis> analyses;  // sorted by (model, image_id)
  std::vector<ModelStatus> statuses;
  std::vector<FailureRecord> failures;
  std::map<std::string, ModelAggregate> aggregates;
  std::map<std::string, DecayProfile> decay;
  std::optional<SweepResult> sweep;
  double elapsed_seconds = 0.0;

  /// True when some model is invalid or has nothing to analyse.
  bool hard_failure() const;
};

/// Detects and classifies every (model, image) pair with files present,
/// writing per-image JSON under out_dir. Output bytes do not depend on workers.
RunReport run_batch(const std::filesystem::path& manifest_path, const std::vector<std::string>& models,
                    const ProbeConfig& cfg, const std::filesystem::path& out_dir, const BatchOptions& opts = {});

/// The single-pair pipeline: detect, then classify.
ImageAnalysis analyze_pair(const ImageBuf& orig, const ImageBuf& gen, const EditBox& box, Embedder& embedder,
                           const ProbeConfig& cfg, const std::string& image_id = {}, const std::string& model = {},
                           EmbeddingCache* cache = nullptr);

}  // namespace spillprobe
