#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "spillprobe/core.hpp"

namespace spillprobe {

enum class EmbedderKind { kReferenceHistogram, kRemoteService };

/// Which embedding provider to use for region similarity.
struct EmbedderSpec {
  EmbedderKind kind = EmbedderKind::kReferenceHistogram;
  std::string endpoint;  // remote only, e.g. "http://127.0.0.1:8080"
  int dimension = 24;    // 0 for remote means "take whatever /health reports"
  int max_in_flight = 8;

  /// "reference" or "remote:URL".
  static EmbedderSpec parse(const std::string& text);
  std::string to_string() const;
  void validate() const;

  friend bool operator==(const EmbedderSpec&, const EmbedderSpec&) = default;
};

/// Default bin edges in edit-box diagonal units.
inline const std::vector<double> kDefaultDistanceBins = {0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0};

struct ProbeConfig {
  double tau = 15.0;
  double sigma = 2.0;
  int min_area = 100;
  double alpha = 1.5;
  double beta = 0.80;
  int pad = 10;
  double epsilon = 0.01;
  int min_regions_for_wus = 5;
  std::vector<double> distance_bins = kDefaultDistanceBins;
  int embed_batch = 64;
  EmbedderSpec embedder;

  void validate() const;

  friend bool operator==(const ProbeConfig&, const ProbeConfig&) = default;
};

void to_json(nlohmann::json& j, const ProbeConfig& cfg);
/// Keys absent from `j` keep the value already in `cfg`.
void merge_from_json(const nlohmann::json& j, ProbeConfig& cfg);
ProbeConfig load_config(const std::filesystem::path& path, ProbeConfig base = {});

/// Parses "0,0.5,1,..." into bin edges.
std::vector<double> parse_bins(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);

/// Stable 64-bit FNV-1a over the canonical JSON dump, as 16 hex digits.
std::string config_hash(const ProbeConfig& cfg);

}  // namespace spillprobe
