#include "spillprobe/results.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <fmt/format.h>

namespace spillprobe {

using nlohmann::json;

namespace {

json rect_json(const Rect& r) { return {r.x_min, r.y_min, r.x_max, r.y_max}; }

Rect rect_from(const json& j) {
  const auto v = j.get<std::vector<int>>();
  if (v.size() != 4) throw Error("bbox must have four integers");
  return {v[0], v[1], v[2], v[3]};
}

json counts_json(const ClassCounts& c) {
  return {{"spatial", c.spatial}, {"semantic", c.semantic}, {"mixed", c.mixed}, {"random", c.random}};
}

}  // namespace

json image_record(const ImageAnalysis& a, const std::string& config_hash) {
  json j;
  j["image_id"] = a.image_id;
  j["model"] = a.model;
  j["status"] = a.failed ? "failed" : "ok";
  if (a.failed) j["error"] = a.error;
  j["spill_rate"] = a.spill_rate;
  j["ssim"] = a.ssim;
  auto regions = json::array();
  for (const auto& r : a.regions) {
    regions.push_back({{"bbox", rect_json(r.bbox)},
                       {"centroid", {r.centroid.x, r.centroid.y}},
                       {"area", r.area},
                       {"d_pixels", r.d_pixels},
                       {"d_norm", r.d_norm},
                       {"similarity", r.similarity},
                       {"class", to_string(r.cls)}});
  }
  j["regions"] = std::move(regions);
  j["counts"] = counts_json(a.counts);
  j["total_spillover_area"] = a.total_spillover_area;
  j["config_hash"] = config_hash;
  return j;
}

ImageAnalysis analysis_from_record(const json& j) {
  try {
    ImageAnalysis a;
    a.image_id = j.at("image_id").get<std::string>();
    a.model = j.at("model").get<std::string>();
    a.failed = j.at("status").get<std::string>() != "ok";
    if (j.contains("error")) a.error = j["error"].get<std::string>();
    a.spill_rate = j.at("spill_rate").get<double>();
    a.ssim = j.at("ssim").get<double>();
    for (const auto& jr : j.at("regions")) {
      SpilloverRegion r;
      r.bbox = rect_from(jr.at("bbox"));
      const auto c = jr.at("centroid").get<std::vector<double>>();
      if (c.size() != 2) throw Error("centroid must have two values");
      r.centroid = {c[0], c[1]};
      r.area = jr.at("area").get<std::int64_t>();
      r.d_pixels = jr.at("d_pixels").get<double>();
      r.d_norm = jr.at("d_norm").get<double>();
      r.similarity = jr.at("similarity").get<double>();
      r.cls = parse_region_class(jr.at("class").get<std::string>());
      a.regions.push_back(r);
    }
    const auto& jc = j.at("counts");
    a.counts.spatial = jc.at("spatial").get<std::int64_t>();
    a.counts.semantic = jc.at("semantic").get<std::int64_t>();
    a.counts.mixed = jc.at("mixed").get<std::int64_t>();
    a.counts.random = jc.at("random").get<std::int64_t>();
    a.total_spillover_area = j.value("total_spillover_area", std::int64_t{0});
    if (a.counts.total() != static_cast<std::int64_t>(a.regions.size())) {
      throw Error("counts do not match the region list");
    }
    return a;
  } catch (const json::exception& e) {
    throw Error(fmt::format("malformed image record: {}", e.what()));
  }
}

std::vector<std::string> LoadedResults::models() const {
  std::set<std::string> names;
  for (const auto& a : analyses) names.insert(a.model);
  for (const auto& s : statuses) names.insert(s.model);
  return {names.begin(), names.end()};
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << j.dump(2) << "\n";
  if (!out) throw Error(fmt::format("write failed: {}", path.string()));
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open {}", path.string()));
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

LoadedResults load_results(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  LoadedResults out;
  const auto images_dir = dir / "images";
  if (!fs::is_directory(images_dir)) throw Error(fmt::format("{} has no images/ directory", dir.string()));

  if (fs::exists(dir / "config.json")) {
    try {
      const auto j = read_json_file(dir / "config.json");
      merge_from_json(j.at("config"), out.config);
      out.config_hash = j.value("config_hash", config_hash(out.config));
    } catch (const std::exception& e) {
      out.problems.push_back(fmt::format("config.json unreadable ({}); using defaults", e.what()));
      out.config_hash = config_hash(out.config);
    }
  } else {
    out.problems.push_back("config.json missing; using defaults");
    out.config_hash = config_hash(out.config);
  }

  std::vector<fs::path> files;
  for (const auto& model_dir : fs::directory_iterator(images_dir)) {
    if (!model_dir.is_directory()) continue;
    for (const auto& f : fs::directory_iterator(model_dir.path())) {
      if (f.path().extension() == ".json") files.push_back(f.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      out.analyses.push_back(analysis_from_record(read_json_file(f)));
    } catch (const std::exception& e) {
      out.problems.push_back(fmt::format("{}: {}", fs::relative(f, dir).generic_string(), e.what()));
    }
  }
  std::sort(out.analyses.begin(), out.analyses.end(), [](const auto& a, const auto& b) {
    return std::tie(a.model, a.image_id) < std::tie(b.model, b.image_id);
  });

  if (fs::exists(dir / "failures.json")) {
    try {
      const auto j = read_json_file(dir / "failures.json");
      for (const auto& m : j.at("models")) {
        out.statuses.push_back({m.at("model").get<std::string>(), m.at("attempted").get<std::int64_t>(),
                                m.at("failed").get<std::int64_t>(), m.at("absent").get<std::int64_t>(),
                                m.at("valid").get<bool>()});
      }
    } catch (const std::exception& e) {
      out.problems.push_back(fmt::format("failures.json unreadable: {}", e.what()));
    }
  }
  if (fs::exists(dir / "sweep.json")) {
    try {
      out.sweep = sweep_result_from_json(read_json_file(dir / "sweep.json"));
    } catch (const std::exception& e) {
      out.problems.push_back(fmt::format("sweep.json unreadable: {}", e.what()));
    }
  }
  return out;
}

FeatureSet features_of(const std::vector<ImageAnalysis>& analyses) {
  FeatureSet fs;
  for (const auto& a : analyses) {
    auto& images = fs[a.model];
    if (a.failed) continue;
    std::vector<RegionFeature> f;
    f.reserve(a.regions.size());
    for (const auto& r : a.regions) f.push_back(r.feature());
    images.push_back(std::move(f));
  }
  return fs;
}

}  // namespace spillprobe
