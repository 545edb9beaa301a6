#include "spillprobe/ablation.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace spillprobe {
namespace {

void check_ascending(const std::vector<double>& v, const char* name) {
  if (v.empty()) throw Error(fmt::format("sweep grid: {} is empty", name));
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) throw Error(fmt::format("sweep grid: {} must be strictly ascending", name));
  }
}

double rounded(double w) { return std::round(w * 1e9) / 1e9; }

std::vector<std::vector<std::string>> rank_models(const std::map<std::string, ModelCell>& models) {
  std::vector<std::pair<double, std::string>> valid;
  for (const auto& [name, mc] : models) {
    if (!mc.wus.is_na()) valid.emplace_back(rounded(*mc.wus.value), name);
  }
  std::sort(valid.begin(), valid.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::vector<std::string>> out;
  for (std::size_t i = 0; i < valid.size(); ++i) {
    if (i == 0 || valid[i].first != valid[i - 1].first) out.emplace_back();
    out.back().push_back(valid[i].second);
  }
  return out;
}

// -1: a above b, 0: tie, 1: b above a, nullopt: either missing.
std::optional<int> relation(const SweepCell& cell, const std::string& a, const std::string& b) {
  std::optional<std::size_t> ra, rb;
  for (std::size_t g = 0; g < cell.ranking.size(); ++g) {
    for (const auto& m : cell.ranking[g]) {
      if (m == a) ra = g;
      if (m == b) rb = g;
    }
  }
  if (!ra || !rb) return std::nullopt;
  return *ra < *rb ? -1 : (*ra == *rb ? 0 : 1);
}

std::string describe(const std::string& a, const std::string& b, int rel) {
  return fmt::format("{} {} {}", a, rel < 0 ? ">" : (rel == 0 ? "=" : "<"), b);
}

}  // namespace

void SweepGrid::validate() const {
  check_ascending(betas, "betas");
  check_ascending(alphas, "alphas");
}

SweepGrid SweepGrid::defaults() { return {{0.70, 0.75, 0.80, 0.85, 0.90}, {1.0, 1.5, 2.0}}; }

const SweepCell& SweepResult::cell(double beta, double alpha) const {
  for (const auto& c : cells) {
    if (std::abs(c.beta - beta) < 1e-12 && std::abs(c.alpha - alpha) < 1e-12) return c;
  }
  throw Error(fmt::format("no sweep cell at beta={} alpha={}", beta, alpha));
}

SweepResult sweep(const FeatureSet& features, const SweepGrid& grid, double epsilon, int min_regions) {
  grid.validate();
  SweepResult result;
  result.grid = grid;
  for (const auto& [model, images] : features) {
    const bool any = std::any_of(images.begin(), images.end(), [](const auto& v) { return !v.empty(); });
    if (!any) {
      result.warnings.push_back(fmt::format("model '{}' has no cached region features; omitted", model));
      continue;
    }
    result.models.push_back(model);
  }

  const auto n_cells = static_cast<std::int64_t>(grid.cell_count());
  result.cells.resize(static_cast<std::size_t>(n_cells));
#pragma omp parallel for schedule(static)
  for (std::int64_t idx = 0; idx < n_cells; ++idx) {
    auto& cell = result.cells[static_cast<std::size_t>(idx)];
    cell.beta = grid.betas[static_cast<std::size_t>(idx) / grid.alphas.size()];
    cell.alpha = grid.alphas[static_cast<std::size_t>(idx) % grid.alphas.size()];
    for (const auto& model : result.models) {
      const auto& images = features.at(model);
      std::vector<ClassCounts> per_image;
      per_image.reserve(images.size());
      ModelCell mc;
      for (const auto& img : images) {
        per_image.push_back(count_classes(img, cell.alpha, cell.beta));
        mc.counts += per_image.back();
      }
      mc.wus = mean_image_wus(per_image, epsilon, min_regions, &mc.wus_valid_images);
      cell.models.emplace(model, mc);
    }
    cell.ranking = rank_models(cell.models);
  }
  return result;
}

std::string format_ranking(const std::vector<std::vector<std::string>>& ranking) {
  std::vector<std::string> groups;
  for (const auto& g : ranking) groups.push_back(fmt::format("{}", fmt::join(g, " = ")));
  return fmt::format("{}", fmt::join(groups, " > "));
}

StabilityReport ranking_stability(const SweepResult& result) {
  if (result.models.size() < 2) throw Error("ranking stability needs at least two models");
  if (result.cells.size() < 2) throw Error("ranking stability needs at least two grid cells");

  StabilityReport report;
  for (const auto& c : result.cells) report.cell_orderings.push_back(format_ranking(c.ranking));

  // First cell where a pair is comparable fixes its expected relation.
  std::map<std::pair<std::string, std::string>, int> expected;
  for (const auto& c : result.cells) {
    std::vector<std::string> reasons;
    for (std::size_t i = 0; i < result.models.size(); ++i) {
      for (std::size_t j = i + 1; j < result.models.size(); ++j) {
        const auto& a = result.models[i];
        const auto& b = result.models[j];
        const auto rel = relation(c, a, b);
        if (!rel) continue;
        auto [it, inserted] = expected.try_emplace({a, b}, *rel);
        if (!inserted && it->second != *rel) {
          reasons.push_back(fmt::format("{} (expected {})", describe(a, b, *rel), describe(a, b, it->second)));
        }
      }
    }
    if (!reasons.empty()) {
      report.stable = false;
      report.violations.push_back({c.beta, c.alpha, format_ranking(c.ranking), fmt::format("{}", fmt::join(reasons, "; "))});
    }
  }
  return report;
}

void to_json(nlohmann::json& j, const SweepResult& r) {
  j = nlohmann::json::object();
  j["betas"] = r.grid.betas;
  j["alphas"] = r.grid.alphas;
  j["models"] = r.models;
  j["warnings"] = r.warnings;
  auto cells = nlohmann::json::array();
  for (const auto& c : r.cells) {
    nlohmann::json jc;
    jc["beta"] = c.beta;
    jc["alpha"] = c.alpha;
    jc["ranking"] = c.ranking;
    auto models = nlohmann::json::object();
    for (const auto& [name, mc] : c.models) {
      nlohmann::json m;
      m["spatial"] = mc.counts.spatial;
      m["semantic"] = mc.counts.semantic;
      m["mixed"] = mc.counts.mixed;
      m["random"] = mc.counts.random;
      m["wus"] = mc.wus.is_na() ? nlohmann::json(nullptr) : nlohmann::json(*mc.wus.value);
      m["wus_valid_images"] = mc.wus_valid_images;
      models[name] = m;
    }
    jc["models"] = models;
    cells.push_back(jc);
  }
  j["cells"] = cells;
}

SweepResult sweep_result_from_json(const nlohmann::json& j) {
  try {
    SweepResult r;
    r.grid.betas = j.at("betas").get<std::vector<double>>();
    r.grid.alphas = j.at("alphas").get<std::vector<double>>();
    r.models = j.at("models").get<std::vector<std::string>>();
    if (j.contains("warnings")) r.warnings = j["warnings"].get<std::vector<std::string>>();
    for (const auto& jc : j.at("cells")) {
      SweepCell c;
      c.beta = jc.at("beta").get<double>();
      c.alpha = jc.at("alpha").get<double>();
      c.ranking = jc.at("ranking").get<std::vector<std::vector<std::string>>>();
      for (const auto& [name, m] : jc.at("models").items()) {
        ModelCell mc;
        mc.counts.spatial = m.at("spatial").get<std::int64_t>();
        mc.counts.semantic = m.at("semantic").get<std::int64_t>();
        mc.counts.mixed = m.at("mixed").get<std::int64_t>();
        mc.counts.random = m.at("random").get<std::int64_t>();
        if (!m.at("wus").is_null()) mc.wus.value = m["wus"].get<double>();
        mc.wus_valid_images = m.at("wus_valid_images").get<std::int64_t>();
        c.models.emplace(name, mc);
      }
      r.cells.push_back(std::move(c));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("malformed sweep result: {}", e.what()));
  }
}

}  // namespace spillprobe
