#include "spillprobe/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

namespace spillprobe {
namespace {

constexpr const char* kNa = "N/A";

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw Error(fmt::format("cannot write {}", path.string()));
  }
  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << csv_field(fields[i]);
    }
    out_ << '\n';
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

std::string trim_number(double v) { return fmt::format("{}", v); }

bool near_value(double a, double b) { return std::abs(a - b) < 1e-9; }

void write_ablation(const LoadedResults& results, const SweepResult& sw, const std::filesystem::path& out_dir,
                    ReportOutput& out) {
  const auto& cfg = results.config;
  auto header = std::vector<std::string>{};

  const bool has_alpha = std::any_of(sw.grid.alphas.begin(), sw.grid.alphas.end(),
                                     [&](double a) { return near_value(a, cfg.alpha); });
  if (has_alpha) {
    CsvWriter w(out_dir / "ablation_beta.csv");
    header = {"beta"};
    header.insert(header.end(), sw.models.begin(), sw.models.end());
    w.row(header);
    for (double beta : sw.grid.betas) {
      const auto& cell = sw.cell(beta, cfg.alpha);
      std::vector<std::string> row{format_fixed(beta, 2)};
      for (const auto& m : sw.models) row.push_back(cell.models.at(m).wus.to_string(2));
      w.row(row);
    }
    out.written.push_back(w.path());
  } else {
    out.notices.push_back(fmt::format("sweep grid lacks alpha={}; ablation_beta.csv omitted", cfg.alpha));
  }

  const bool has_beta = std::any_of(sw.grid.betas.begin(), sw.grid.betas.end(),
                                    [&](double b) { return near_value(b, cfg.beta); });
  if (has_beta) {
    CsvWriter w(out_dir / "ablation_alpha.csv");
    header = {"alpha"};
    header.insert(header.end(), sw.models.begin(), sw.models.end());
    w.row(header);
    for (double alpha : sw.grid.alphas) {
      const auto& cell = sw.cell(cfg.beta, alpha);
      std::vector<std::string> row{format_fixed(alpha, 2)};
      for (const auto& m : sw.models) row.push_back(cell.models.at(m).wus.to_string(2));
      w.row(row);
    }
    out.written.push_back(w.path());
  } else {
    out.notices.push_back(fmt::format("sweep grid lacks beta={}; ablation_alpha.csv omitted", cfg.beta));
  }

  {
    CsvWriter w(out_dir / "ablation_grid.csv");
    w.row({"beta", "alpha", "model", "spatial", "semantic", "mixed", "random", "wus", "wus_valid_images"});
    for (const auto& c : sw.cells) {
      for (const auto& [m, mc] : c.models) {
        w.row({format_fixed(c.beta, 2), format_fixed(c.alpha, 2), m, std::to_string(mc.counts.spatial),
               std::to_string(mc.counts.semantic), std::to_string(mc.counts.mixed), std::to_string(mc.counts.random),
               mc.wus.is_na() ? kNa : fmt::format("{:.6f}", *mc.wus.value), std::to_string(mc.wus_valid_images)});
      }
    }
    out.written.push_back(w.path());
  }

  CsvWriter w(out_dir / "ablation_rankings.csv");
  w.row({"beta", "alpha", "ranking", "violation"});
  if (sw.models.size() >= 2 && sw.cells.size() >= 2) {
    const auto stab = ranking_stability(sw);
    for (std::size_t i = 0; i < sw.cells.size(); ++i) {
      std::string violation;
      for (const auto& v : stab.violations) {
        if (near_value(v.beta, sw.cells[i].beta) && near_value(v.alpha, sw.cells[i].alpha)) violation = v.reason;
      }
      w.row({format_fixed(sw.cells[i].beta, 2), format_fixed(sw.cells[i].alpha, 2), stab.cell_orderings[i],
             violation});
    }
    out.notices.push_back(fmt::format("ranking {} across {} grid cells", stab.stable ? "stable" : "unstable",
                                      sw.cells.size()));
  } else {
    for (const auto& c : sw.cells) {
      w.row({format_fixed(c.beta, 2), format_fixed(c.alpha, 2), format_ranking(c.ranking), ""});
    }
    out.notices.push_back("ranking stability needs at least two models and two grid cells; not assessed");
  }
  out.written.push_back(w.path());
}

}  // namespace

std::string format_fixed(double v, int decimals) { return fmt::format("{:.{}f}", v, decimals); }

std::string format_optional(const std::optional<double>& v, int decimals) {
  return v ? format_fixed(*v, decimals) : std::string(kNa);
}

std::string bin_label(const DistanceBin& b) { return fmt::format("{}-{}x", trim_number(b.lo), trim_number(b.hi)); }

ReportOutput export_tables(const LoadedResults& results, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  ReportOutput out;
  out.problems = results.problems;
  const auto& cfg = results.config;

  std::vector<std::string> models;
  for (const auto& m : results.models()) {
    std::vector<ImageAnalysis> subset;
    for (const auto& a : results.analyses) {
      if (a.model == m) subset.push_back(a);
    }
    const bool any_ok = std::any_of(subset.begin(), subset.end(), [](const auto& a) { return !a.failed; });
    if (!any_ok) {
      out.notices.push_back(fmt::format("model '{}' has no successful analyses; left out of the tables", m));
      continue;
    }
    models.push_back(m);
    out.aggregates.emplace(m, aggregate(subset, cfg.epsilon, cfg.min_regions_for_wus));
    std::vector<SpilloverRegion> regions;
    for (const auto& a : subset) {
      if (!a.failed) regions.insert(regions.end(), a.regions.begin(), a.regions.end());
    }
    out.decay.emplace(m, decay_profile(regions, cfg.distance_bins, cfg.beta));
  }

  auto status_of = [&](const std::string& m) -> std::string {
    for (const auto& s : results.statuses) {
      if (s.model == m) return s.valid ? "yes" : "no";
    }
    return "unknown";
  };

  {
    CsvWriter w(out_dir / "main_results.csv");
    w.row({"model", "imgs", "spill_pct", "ssim", "regions", "spat_pct", "sem_pct", "mix_pct", "rand_pct", "wus",
           "sem_cnt", "sem_den", "images_failed", "total_regions", "wus_pooled", "wus_valid_images", "spat_pct_img",
           "sem_pct_img", "mix_pct_img", "rand_pct_img", "valid"});
    for (const auto& m : models) {
      const auto& a = out.aggregates.at(m);
      w.row({m, std::to_string(a.images_used), format_fixed(a.mean_spill_rate, 2), format_fixed(a.mean_ssim, 3),
             format_fixed(a.mean_regions_per_image, 1), format_fixed(a.class_proportions[0], 1),
             format_fixed(a.class_proportions[1], 1), format_fixed(a.class_proportions[2], 1),
             format_fixed(a.class_proportions[3], 1), a.wus_aggregate.to_string(2), std::to_string(a.semantic_total),
             format_fixed(a.semantic_density, 1), std::to_string(a.images_failed), std::to_string(a.totals.total()),
             a.wus_pooled.to_string(2), std::to_string(a.wus_valid_images),
             format_fixed(a.class_proportions_per_image[0], 1), format_fixed(a.class_proportions_per_image[1], 1),
             format_fixed(a.class_proportions_per_image[2], 1), format_fixed(a.class_proportions_per_image[3], 1),
             status_of(m)});
    }
    out.written.push_back(w.path());
  }

  std::vector<std::string> header{"distance"};
  header.insert(header.end(), models.begin(), models.end());
  {
    CsvWriter density(out_dir / "decay_density.csv");
    CsvWriter proportion(out_dir / "semantic_proportion.csv");
    density.row(header);
    proportion.row(header);
    const auto n_bins = cfg.distance_bins.size() - 1;
    for (std::size_t k = 0; k < n_bins; ++k) {
      const DistanceBin label_bin{cfg.distance_bins[k], cfg.distance_bins[k + 1]};
      std::vector<std::string> drow{bin_label(label_bin)}, prow{bin_label(label_bin)};
      for (const auto& m : models) {
        const auto& p = out.decay.at(m);
        drow.push_back(format_optional(p.density_normalized[k], 1));
        prow.push_back(format_optional(p.semantic_proportion[k], 1));
      }
      density.row(drow);
      proportion.row(prow);
    }
    out.written.push_back(density.path());
    out.written.push_back(proportion.path());
  }
  {
    CsvWriter w(out_dir / "decay_overflow.csv");
    w.row({"model", "beyond", "regions", "area"});
    for (const auto& m : models) {
      const auto& p = out.decay.at(m);
      w.row({m, trim_number(cfg.distance_bins.back()), std::to_string(p.overflow_count),
             std::to_string(p.overflow_area)});
    }
    out.written.push_back(w.path());
  }
  for (const auto& m : models) {
    const auto& p = out.decay.at(m);
    CsvWriter w(out_dir / fmt::format("decay_curve_{}.csv", m));
    w.row({"midpoint", "density_normalized", "density_raw", "regions"});
    for (std::size_t k = 0; k < p.bins.size(); ++k) {
      w.row({trim_number(p.bins[k].midpoint()), format_optional(p.density_normalized[k], 3),
             fmt::format("{:.6g}", p.density_raw[k]), std::to_string(p.bins[k].region_count)});
    }
    out.written.push_back(w.path());
  }

  if (results.sweep) {
    write_ablation(results, *results.sweep, out_dir, out);
  } else {
    out.notices.push_back("no sweep results present; ablation tables omitted (run `sweep` first)");
  }

  if (!out.problems.empty()) {
    std::ofstream w(out_dir / "problems.txt", std::ios::binary);
    for (const auto& p : out.problems) w << p << '\n';
    out.written.push_back(out_dir / "problems.txt");
  } else {
    std::error_code ec;
    std::filesystem::remove(out_dir / "problems.txt", ec);
  }
  return out;
}

ReportOutput run_report(const std::filesystem::path& results_dir, const std::filesystem::path& out_dir) {
  return export_tables(load_results(results_dir), out_dir);
}

SweepOutput run_sweep(const std::filesystem::path& results_dir, const SweepGrid& grid) {
  const auto loaded = load_results(results_dir);
  SweepOutput out;
  out.result = sweep(features_of(loaded.analyses), grid, loaded.config.epsilon, loaded.config.min_regions_for_wus);
  for (const auto& p : loaded.problems) out.result.warnings.push_back(p);
  if (out.result.models.size() >= 2 && out.result.cells.size() >= 2) out.stability = ranking_stability(out.result);
  nlohmann::json j;
  to_json(j, out.result);
  write_json_file(results_dir / "sweep.json", j);
  return out;
}

}  // namespace spillprobe
