#include "spillprobe/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace spillprobe {

EmbedderSpec EmbedderSpec::parse(const std::string& text) {
  EmbedderSpec spec;
  if (text == "reference" || text == "reference-histogram") {
    return spec;
  }
  constexpr std::string_view kRemote = "remote:";
  if (text.rfind(kRemote, 0) == 0) {
    spec.kind = EmbedderKind::kRemoteService;
    spec.endpoint = text.substr(kRemote.size());
    spec.dimension = 0;
    spec.validate();
    return spec;
  }
  throw Error(fmt::format("unknown embedder '{}': expected 'reference' or 'remote:URL'", text));
}

std::string EmbedderSpec::to_string() const {
  return kind == EmbedderKind::kReferenceHistogram ? "reference" : "remote:" + endpoint;
}

void EmbedderSpec::validate() const {
  if (kind == EmbedderKind::kReferenceHistogram) {
    if (dimension != 24) throw Error("reference embedder has dimension 24");
    return;
  }
  if (endpoint.rfind("http://", 0) != 0) {
    throw Error(fmt::format("remote embedder endpoint '{}' must start with http://", endpoint));
  }
  auto rest = endpoint.substr(endpoint.find("://") + 3);
  if (rest.empty() || rest.front() == '/' || rest.front() == ':') {
    throw Error(fmt::format("remote embedder endpoint '{}' has no host", endpoint));
  }
  if (dimension != 0 && dimension < 2) throw Error("embedding dimension must be >= 2");
  if (max_in_flight < 1) throw Error("max_in_flight must be >= 1");
}

void ProbeConfig::validate() const {
  if (!(tau > 0.0 && tau < 255.0)) throw Error(fmt::format("tau must lie in (0, 255), got {}", tau));
  if (!(sigma > 0.0)) throw Error(fmt::format("sigma must be positive, got {}", sigma));
  if (min_area < 1) throw Error(fmt::format("min_area must be >= 1, got {}", min_area));
  if (!(alpha > 0.0)) throw Error(fmt::format("alpha must be positive, got {}", alpha));
  if (!(beta > -1.0 && beta < 1.0)) throw Error(fmt::format("beta must lie in (-1, 1), got {}", beta));
  if (pad < 0) throw Error("pad must be non-negative");
  if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
  if (min_regions_for_wus < 0) throw Error("min_regions_for_wus must be non-negative");
  if (embed_batch < 1) throw Error("embed_batch must be >= 1");
  if (distance_bins.size() < 2 || distance_bins.front() != 0.0) {
    throw Error("distance bins need at least two edges, starting at 0");
  }
  for (std::size_t i = 1; i < distance_bins.size(); ++i) {
    if (!(distance_bins[i] > distance_bins[i - 1])) {
      throw Error("distance bins must be strictly increasing");
    }
  }
  embedder.validate();
}

void to_json(nlohmann::json& j, const ProbeConfig& cfg) {
  j = nlohmann::json{{"tau", cfg.tau},
                     {"sigma", cfg.sigma},
                     {"min_area", cfg.min_area},
                     {"alpha", cfg.alpha},
                     {"beta", cfg.beta},
                     {"pad", cfg.pad},
                     {"epsilon", cfg.epsilon},
                     {"min_regions_for_wus", cfg.min_regions_for_wus},
                     {"distance_bins", cfg.distance_bins},
                     {"embed_batch", cfg.embed_batch},
                     {"embedder", cfg.embedder.to_string()}};
}

void merge_from_json(const nlohmann::json& j, ProbeConfig& cfg) {
  if (!j.is_object()) throw Error("config must be a JSON object");
  try {
    if (j.contains("tau")) cfg.tau = j.at("tau").get<double>();
    if (j.contains("sigma")) cfg.sigma = j.at("sigma").get<double>();
    if (j.contains("min_area")) cfg.min_area = j.at("min_area").get<int>();
    if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
    if (j.contains("beta")) cfg.beta = j.at("beta").get<double>();
    if (j.contains("pad")) cfg.pad = j.at("pad").get<int>();
    if (j.contains("epsilon")) cfg.epsilon = j.at("epsilon").get<double>();
    if (j.contains("min_regions_for_wus")) cfg.min_regions_for_wus = j.at("min_regions_for_wus").get<int>();
    if (j.contains("distance_bins")) cfg.distance_bins = j.at("distance_bins").get<std::vector<double>>();
    if (j.contains("embed_batch")) cfg.embed_batch = j.at("embed_batch").get<int>();
    if (j.contains("embedder")) cfg.embedder = EmbedderSpec::parse(j.at("embedder").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("bad config value: {}", e.what()));
  }
}

ProbeConfig load_config(const std::filesystem::path& path, ProbeConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open config {}", path.string()));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(fmt::format("config {}: {}", path.string(), e.what()));
  }
  merge_from_json(j, base);
  base.validate();
  return base;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && item[used] == ' ') ++used;
    if (used == 0 || used != item.size()) {
      throw Error(fmt::format("cannot parse number '{}' in list '{}'", item, text));
    }
    out.push_back(v);
  }
  if (out.empty()) throw Error("empty number list");
  return out;
}

std::vector<double> parse_bins(const std::string& text) {
  auto bins = parse_double_list(text);
  ProbeConfig probe;
  probe.distance_bins = bins;
  probe.validate();
  return bins;
}

std::string config_hash(const ProbeConfig& cfg) {
  nlohmann::json j = cfg;
  const std::string canonical = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace spillprobe
