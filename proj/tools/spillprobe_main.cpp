#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "spillprobe/batch.hpp"
#include "spillprobe/image_io.hpp"
#include "spillprobe/report.hpp"
#include "spillprobe/synth.hpp"

namespace sp = spillprobe;

namespace {

constexpr int kUsageError = 2;

struct ConfigFlags {
  std::string config_file;
  std::optional<double> tau, sigma, alpha, beta;
  std::optional<int> min_area, pad;
  std::optional<std::string> embedder, bins;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "JSON config file (flags override it)");
    app->add_option("--tau", tau, "pixel-difference threshold [15]");
    app->add_option("--sigma", sigma, "blur standard deviation in pixels [2.0]");
    app->add_option("--min-area", min_area, "minimum region area in pixels [100]");
    app->add_option("--alpha", alpha, "distance threshold factor [1.5]");
    app->add_option("--beta", beta, "similarity threshold [0.80]");
    app->add_option("--pad", pad, "crop padding in pixels [10]");
    app->add_option("--embedder", embedder, "reference | remote:URL [reference]");
    app->add_option("--bins", bins, "distance bin edges [0,0.5,1,1.5,2,3,5,10]");
  }

  sp::ProbeConfig resolve() const {
    sp::ProbeConfig cfg;
    if (!config_file.empty()) cfg = sp::load_config(config_file, cfg);
    if (tau) cfg.tau = *tau;
    if (sigma) cfg.sigma = *sigma;
    if (min_area) cfg.min_area = *min_area;
    if (alpha) cfg.alpha = *alpha;
    if (beta) cfg.beta = *beta;
    if (pad) cfg.pad = *pad;
    if (embedder) cfg.embedder = sp::EmbedderSpec::parse(*embedder);
    if (bins) cfg.distance_bins = sp::parse_bins(*bins);
    cfg.validate();
    return cfg;
  }
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    auto item = text.substr(start, end - start);
    if (!item.empty()) out.push_back(item);
    start = end + 1;
  }
  return out;
}

void print_report(const sp::ReportOutput& out) {
  for (const auto& p : out.written) fmt::print("wrote {}\n", p.string());
  for (const auto& n : out.notices) fmt::print("note: {}\n", n);
  for (const auto& p : out.problems) fmt::print(stderr, "problem: {}\n", p);
}

void print_sweep(const sp::SweepOutput& out) {
  for (const auto& w : out.result.warnings) fmt::print(stderr, "warning: {}\n", w);
  for (const auto& c : out.result.cells) {
    fmt::print("beta={:.2f} alpha={:.2f}  {}\n", c.beta, c.alpha, sp::format_ranking(c.ranking));
  }
  if (out.stability) {
    fmt::print("ranking {}\n", out.stability->stable ? "stable" : "UNSTABLE");
    for (const auto& v : out.stability->violations) {
      fmt::print("  beta={:.2f} alpha={:.2f}: {}\n", v.beta, v.alpha, v.reason);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Measures and classifies edit spillover between original and edited images."};
  app.require_subcommand(1);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "analyse one original/generated pair");
  ConfigFlags analyze_flags;
  analyze_flags.attach(analyze);
  std::string orig_path, gen_path, box_text, analyze_out;
  analyze->add_option("original", orig_path)->required()->check(CLI::ExistingFile);
  analyze->add_option("generated", gen_path)->required()->check(CLI::ExistingFile);
  analyze->add_option("--box", box_text, "edit box x_min,y_min,x_max,y_max")->required();
  analyze->add_option("--out", analyze_out, "write the JSON record here instead of stdout");

  // batch
  auto* batch = app.add_subcommand("batch", "analyse every (model, image) pair of a manifest");
  ConfigFlags batch_flags;
  batch_flags.attach(batch);
  std::string manifest_path, models_text, batch_out;
  int workers = 8;
  bool batch_sweep = false;
  std::string batch_betas = "0.70,0.75,0.80,0.85,0.90", batch_alphas = "1.0,1.5,2.0";
  batch->add_option("--manifest", manifest_path)->required()->check(CLI::ExistingFile);
  batch->add_option("--models", models_text, "comma-separated model names")->required();
  batch->add_option("--out", batch_out)->required();
  batch->add_option("--workers", workers, "parallel tasks [8]")->check(CLI::PositiveNumber);
  batch->add_flag("--sweep", batch_sweep, "also run the threshold sweep");
  batch->add_option("--betas", batch_betas);
  batch->add_option("--alphas", batch_alphas);

  // report
  auto* report = app.add_subcommand("report", "export tables from a results directory");
  std::string report_in, report_out;
  report->add_option("--in", report_in)->required()->check(CLI::ExistingDirectory);
  report->add_option("--out", report_out)->required();

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "re-classify cached features over a threshold grid");
  std::string sweep_in, sweep_betas = "0.70,0.75,0.80,0.85,0.90", sweep_alphas = "1.0,1.5,2.0";
  sweep_cmd->add_option("--in", sweep_in)->required()->check(CLI::ExistingDirectory);
  sweep_cmd->add_option("--betas", sweep_betas);
  sweep_cmd->add_option("--alphas", sweep_alphas);

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic fixture dataset");
  std::string synth_group, synth_out, synth_models = "synthetic";
  int synth_count = 1, synth_size = 1024, synth_workers = 8;
  std::uint64_t synth_seed = 1;
  synth->add_option("--group", synth_group, "A, B, C, or a sequence such as ABC to cycle")->required();
  synth->add_option("--count", synth_count)->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed);
  synth->add_option("--out", synth_out)->required();
  synth->add_option("--size", synth_size, "image side in pixels [1024]")->check(CLI::Range(sp::kMinPresetSize, 8192));
  synth->add_option("--models", synth_models, "pseudo-model names sharing the generated images");
  synth->add_option("--workers", synth_workers)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*analyze) {
      const auto cfg = analyze_flags.resolve();
      const auto box = sp::parse_box(box_text);
      const auto orig = sp::read_image(orig_path);
      const auto gen = sp::read_image(gen_path);
      box.validate(orig.width(), orig.height());
      auto embedder = sp::make_embedder(cfg.embedder);
      const auto a = sp::analyze_pair(orig, gen, box, *embedder, cfg, "single", "single");
      const auto record = sp::image_record(a, sp::config_hash(cfg));
      if (analyze_out.empty()) {
        std::cout << record.dump(2) << "\n";
      } else {
        sp::write_json_file(analyze_out, record);
      }
      return a.failed ? 1 : 0;
    }

    if (*batch) {
      const auto models = split_list(models_text);
      if (models.empty()) {
        fmt::print(stderr, "batch: --models must name at least one model\n");
        return kUsageError;
      }
      const auto cfg = batch_flags.resolve();
      sp::BatchOptions opts;
      opts.workers = workers;
      if (batch_sweep) opts.sweep = sp::SweepGrid{sp::parse_double_list(batch_betas), sp::parse_double_list(batch_alphas)};
      const auto rep = sp::run_batch(manifest_path, models, cfg, batch_out, opts);
      for (const auto& st : rep.statuses) {
        fmt::print("{}: {} analysed, {} failed, {} absent{}\n", st.model, st.attempted, st.failed, st.absent,
                   st.valid ? "" : "  [INVALID]");
      }
      fmt::print("elapsed {:.1f} s\n", rep.elapsed_seconds);
      return rep.hard_failure() ? 1 : 0;
    }

    if (*report) {
      const auto out = sp::run_report(report_in, report_out);
      print_report(out);
      return 0;
    }

    if (*sweep_cmd) {
      const sp::SweepGrid grid{sp::parse_double_list(sweep_betas), sp::parse_double_list(sweep_alphas)};
      print_sweep(sp::run_sweep(sweep_in, grid));
      return 0;
    }

    if (*synth) {
      sp::SynthOptions opts;
      for (char c : synth_group) opts.groups.push_back(sp::parse_group(std::string(1, c)));
      opts.count = synth_count;
      opts.seed = synth_seed;
      opts.size = synth_size;
      opts.models = split_list(synth_models);
      opts.workers = synth_workers;
      const auto manifest = sp::write_synthetic_dataset(opts, synth_out);
      fmt::print("wrote {} fixtures and {}\n", manifest.entries.size(), (std::filesystem::path(synth_out) / "manifest.json").string());
      return 0;
    }
  } catch (const sp::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
