#include "spillprobe/batch.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include <fmt/format.h>
#include <omp.h>

#include "spillprobe/image_io.hpp"
#include "spillprobe/manifest.hpp"
#include "spillprobe/report.hpp"

namespace spillprobe {

using nlohmann::json;

namespace {

struct Task {
  std::string model;
  const ManifestEntry* entry = nullptr;
};

struct TaskResult {
  ImageAnalysis analysis;
  double seconds = 0.0;
};

}  // namespace

bool RunReport::hard_failure() const {
  return std::any_of(statuses.begin(), statuses.end(),
                     [](const ModelStatus& s) { return !s.valid || s.attempted == 0; });
}

ImageAnalysis analyze_pair(const ImageBuf& orig, const ImageBuf& gen, const EditBox& box, Embedder& embedder,
                           const ProbeConfig& cfg, const std::string& image_id, const std::string& model,
                           EmbeddingCache* cache) {
  const auto det = detect(orig, gen, box, cfg);
  return classify_image(det, gen, box, embedder, cfg, image_id, model, cache);
}

RunReport run_batch(const std::filesystem::path& manifest_path, const std::vector<std::string>& models,
                    const ProbeConfig& cfg, const std::filesystem::path& out_dir, const BatchOptions& opts) {
  namespace fs = std::filesystem;
  if (models.empty()) throw Error("no models given");
  if (opts.workers < 1) throw Error("workers must be at least 1");
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  const auto manifest = load_manifest(manifest_path);
  auto embedder = make_embedder(cfg.embedder);
  EmbeddingCache cache;

  RunReport report;
  report.config = cfg;
  report.config_hash = config_hash(cfg);

  std::set<std::string> unique_models(models.begin(), models.end());
  std::vector<Task> tasks;
  for (const auto& model : unique_models) {
    ModelStatus st;
    st.model = model;
    std::vector<const ManifestEntry*> entries;
    for (const auto& e : manifest.entries) entries.push_back(&e);
    std::sort(entries.begin(), entries.end(),
              [](const ManifestEntry* a, const ManifestEntry* b) { return a->image_id < b->image_id; });
    for (const auto* e : entries) {
      if (!e->generated.contains(model)) {
        ++st.absent;
        report.failures.push_back({model, e->image_id, "absent", "no generated image listed for this model"});
      } else if (!e->usable(model)) {
        ++st.absent;
        report.failures.push_back({model, e->image_id, "absent", e->absent.at(model)});
      } else {
        ++st.attempted;
        tasks.push_back({model, e});
      }
    }
    report.statuses.push_back(st);
  }

  std::vector<TaskResult> results(tasks.size());
  // Tasks run in parallel; the kernels inside each task stay serial.
  omp_set_max_active_levels(1);
  const auto n = static_cast<std::int64_t>(tasks.size());
#pragma omp parallel for schedule(dynamic) num_threads(opts.workers)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& task = tasks[static_cast<std::size_t>(i)];
    auto& slot = results[static_cast<std::size_t>(i)];
    const auto start = std::chrono::steady_clock::now();
    try {
      const auto orig = read_image(task.entry->original_resolved);
      const auto gen = read_image(task.entry->generated_for(task.model));
      slot.analysis = analyze_pair(orig, gen, task.entry->edit_box, *embedder, cfg, task.entry->image_id,
                                   task.model, &cache);
    } catch (const std::exception& e) {
      slot.analysis = {};
      slot.analysis.image_id = task.entry->image_id;
      slot.analysis.model = task.model;
      slot.analysis.failed = true;
      slot.analysis.error = e.what();
    }
    slot.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  // Single writer, fixed order.
  // Stale records from an earlier run would otherwise leak into the report.
  for (const auto& model : unique_models) fs::remove_all(out_dir / "images" / model);
  fs::create_directories(out_dir / "images");
  json cfg_json;
  to_json(cfg_json, cfg);
  write_json_file(out_dir / "config.json", {{"config", cfg_json},
                                            {"config_hash", report.config_hash},
                                            {"models", std::vector<std::string>(unique_models.begin(), unique_models.end())},
                                            {"embedder", embedder->name()},
                                            {"manifest", fs::absolute(manifest_path).lexically_normal().generic_string()}});
  json timing_tasks = json::array();
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& a = results[i].analysis;
    fs::create_directories(out_dir / "images" / a.model);
    write_json_file(out_dir / "images" / a.model / (a.image_id + ".json"), image_record(a, report.config_hash));
    timing_tasks.push_back({{"model", a.model}, {"image_id", a.image_id}, {"seconds", results[i].seconds}});
    if (a.failed) {
      report.failures.push_back({a.model, a.image_id, "error", a.error});
      for (auto& st : report.statuses) {
        if (st.model == a.model) ++st.failed;
      }
    }
    report.analyses.push_back(a);
  }
  for (auto& st : report.statuses) st.valid = st.attempted > 0 && 2 * st.failed <= st.attempted;
  std::stable_sort(report.failures.begin(), report.failures.end(), [](const auto& a, const auto& b) {
    return std::tie(a.model, a.image_id) < std::tie(b.model, b.image_id);
  });

  json jstatus = json::array();
  for (const auto& st : report.statuses) {
    jstatus.push_back({{"model", st.model},
                       {"attempted", st.attempted},
                       {"failed", st.failed},
                       {"absent", st.absent},
                       {"valid", st.valid}});
  }
  json jfail = json::array();
  for (const auto& f : report.failures) {
    jfail.push_back({{"model", f.model}, {"image_id", f.image_id}, {"kind", f.kind}, {"reason", f.reason}});
  }
  write_json_file(out_dir / "failures.json", {{"models", jstatus}, {"failures", jfail}});

  if (opts.sweep) {
    const auto features = features_of(report.analyses);
    report.sweep = sweep(features, *opts.sweep, cfg.epsilon, cfg.min_regions_for_wus);
    json js;
    to_json(js, *report.sweep);
    write_json_file(out_dir / "sweep.json", js);
  } else {
    std::error_code ec;
    fs::remove(out_dir / "sweep.json", ec);
  }

  if (opts.export_tables) {
    auto exported = run_report(out_dir, out_dir / "tables");
    report.aggregates = std::move(exported.aggregates);
    report.decay = std::move(exported.decay);
  }

  report.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_json_file(out_dir / "timing.json",
                  {{"elapsed_seconds", report.elapsed_seconds}, {"workers", opts.workers}, {"tasks", timing_tasks}});
  return report;
}

}  // namespace spillprobe
