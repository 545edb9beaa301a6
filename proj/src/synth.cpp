#include "spillprobe/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <fmt/format.h>

#include "spillprobe/image_io.hpp"

namespace spillprobe {
namespace {

constexpr int kImageMargin = 8;
constexpr int kBoxGap = 4;
constexpr int kBlobGap = 28;
constexpr int kPatchInset = 10;
constexpr int kPlacementAttempts = 400;
constexpr int kPresetAttempts = 200;
constexpr double kBackgroundLuma = 128.0;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// std distributions are implementation-defined; these are not.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double uniform_real(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }
int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

std::uint8_t solve_green(double luma, double r, double b) {
  const double g = std::round((luma - 0.299 * r - 0.114 * b) / 0.587);
  if (g < 0.0 || g > 255.0) throw Error(fmt::format("luma {} not reachable with r={} b={}", luma, r, b));
  return static_cast<std::uint8_t>(g);
}

Rect dilate(const Rect& r, int by) { return {r.x_min - by, r.y_min - by, r.x_max + by, r.y_max + by}; }

bool intersects(const Rect& a, const Rect& b) {
  return a.x_min < b.x_max && b.x_min < a.x_max && a.y_min < b.y_max && b.y_min < a.y_max;
}

std::optional<PlantedBlob> try_place(const FixtureSpec& spec, const BlobSpec& blob,
                                     const std::vector<PlantedBlob>& placed, std::mt19937_64& rng) {
  const Point c0 = box_center(spec.box);
  const double diag = box_diag(spec.box);
  const Rect inner{kImageMargin, kImageMargin, spec.width - kImageMargin, spec.height - kImageMargin};
  for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
    const double theta = uniform_real(rng, 0.0, 2.0 * std::numbers::pi);
    const double aspect = uniform_real(rng, 0.8, 1.25);
    const double ax = std::sqrt(static_cast<double>(blob.area) * aspect / std::numbers::pi);
    const double ay = std::sqrt(static_cast<double>(blob.area) / (aspect * std::numbers::pi));
    const double cx = c0.x + blob.distance_units * diag * std::cos(theta);
    const double cy = c0.y + blob.distance_units * diag * std::sin(theta);

    const Rect bounds{static_cast<int>(std::floor(cx - ax)), static_cast<int>(std::floor(cy - ay)),
                      static_cast<int>(std::ceil(cx + ax)) + 1, static_cast<int>(std::ceil(cy + ay)) + 1};
    if (bounds.x_min < inner.x_min || bounds.y_min < inner.y_min || bounds.x_max > inner.x_max ||
        bounds.y_max > inner.y_max) {
      continue;
    }
    if (intersects(dilate(bounds, kBoxGap), spec.box.rect())) continue;
    const bool clash = std::any_of(placed.begin(), placed.end(),
                                   [&](const PlantedBlob& p) { return intersects(dilate(bounds, kBlobGap), p.bbox); });
    if (clash) continue;

    PlantedBlob out;
    out.spec = blob;
    Rect bb{bounds.x_max, bounds.y_max, bounds.x_min, bounds.y_min};
    double sx = 0.0, sy = 0.0;
    for (int y = bounds.y_min; y < bounds.y_max; ++y) {
      for (int x = bounds.x_min; x < bounds.x_max; ++x) {
        const double u = (x - cx) / ax;
        const double v = (y - cy) / ay;
        if (u * u + v * v > 1.0) continue;
        out.pixels.push_back(static_cast<std::uint32_t>(y) * static_cast<std::uint32_t>(spec.width) +
                             static_cast<std::uint32_t>(x));
        sx += x;
        sy += y;
        bb = {std::min(bb.x_min, x), std::min(bb.y_min, y), std::max(bb.x_max, x + 1), std::max(bb.y_max, y + 1)};
      }
    }
    if (out.pixels.empty()) continue;
    const auto n = static_cast<double>(out.pixels.size());
    out.centroid = {sx / n, sy / n};
    out.bbox = bb;
    out.d_norm = normalized_distance(out.centroid, spec.box);
    if (std::abs(out.d_norm - blob.distance_units) > kPlacementTolerance) continue;
    return out;
  }
  return std::nullopt;
}

std::vector<PlantedBlob> place_blobs(const FixtureSpec& spec) {
  std::mt19937_64 rng(splitmix64(spec.seed ^ 0x5EEDB10Bull));
  std::vector<PlantedBlob> placed;
  for (std::size_t i = 0; i < spec.blobs.size(); ++i) {
    auto p = try_place(spec, spec.blobs[i], placed, rng);
    if (!p) {
      throw Error(fmt::format("blob {} (d_norm {:.2f}, area {}) cannot be placed in {}x{} around box {},{},{},{}", i,
                              spec.blobs[i].distance_units, spec.blobs[i].area, spec.width, spec.height,
                              spec.box.x_min, spec.box.y_min, spec.box.x_max, spec.box.y_max));
    }
    placed.push_back(std::move(*p));
  }
  return placed;
}

ImageBuf background(const FixtureSpec& spec) {
  // Random red/blue with green solved for constant luma: colourful, flat in gray.
  std::mt19937_64 rng(splitmix64(spec.seed ^ 0xBAC6B0DEull));
  ImageBuf img(spec.width, spec.height);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const auto bits = rng();
      const auto r = static_cast<std::uint8_t>(bits & 0xFF);
      const auto b = static_cast<std::uint8_t>((bits >> 8) & 0xFF);
      img.set(x, y, r, solve_green(kBackgroundLuma, r, b), b);
    }
  }
  return img;
}

}  // namespace

Rgb related_color(int contrast) { return {250, solve_green(kBackgroundLuma + contrast, 250, 20), 20}; }
Rgb unrelated_color(int contrast) { return {10, solve_green(kBackgroundLuma - contrast, 10, 235), 235}; }

std::uint64_t fixture_seed(std::uint64_t seed, std::uint64_t index) { return splitmix64(seed * 0x100000001B3ull + index); }

void FixtureSpec::validate() const {
  if (width < 32 || height < 32) throw Error("fixture image must be at least 32x32");
  box.validate(width, height);
  if (box.rect().width() <= 2 * kPatchInset || box.rect().height() <= 2 * kPatchInset) {
    throw Error(fmt::format("edit box must exceed {} px per side", 2 * kPatchInset));
  }
  related_color(edit_contrast);
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    const auto& b = blobs[i];
    if (b.area < 1 || b.distance_units < 0.0) throw Error(fmt::format("blob {}: invalid area or distance", i));
    if (b.related) {
      related_color(b.contrast);
    } else {
      unrelated_color(b.contrast);
    }
  }
}

Fixture gen_fixture(const FixtureSpec& spec) {
  spec.validate();
  Fixture f;
  f.box = spec.box;
  f.truth.seed = spec.seed;
  f.truth.group = spec.group;
  f.truth.box = spec.box;
  f.truth.blobs = place_blobs(spec);

  f.original = background(spec);
  const Rect patch{spec.box.x_min + kPatchInset, spec.box.y_min + kPatchInset, spec.box.x_max - kPatchInset,
                   spec.box.y_max - kPatchInset};
  f.truth.edit_patch = patch;
  const Rgb old_color{60, solve_green(88.0, 60, 60), 60};
  for (int y = patch.y_min; y < patch.y_max; ++y) {
    for (int x = patch.x_min; x < patch.x_max; ++x) f.original.set(x, y, old_color.r, old_color.g, old_color.b);
  }

  f.generated = f.original;
  const Rgb new_color = related_color(spec.edit_contrast);
  for (int y = patch.y_min; y < patch.y_max; ++y) {
    for (int x = patch.x_min; x < patch.x_max; ++x) f.generated.set(x, y, new_color.r, new_color.g, new_color.b);
  }
  for (auto& blob : f.truth.blobs) {
    const Rgb c = blob.spec.related ? related_color(blob.spec.contrast) : unrelated_color(blob.spec.contrast);
    for (auto idx : blob.pixels) {
      f.generated.set(static_cast<int>(idx % static_cast<std::uint32_t>(spec.width)),
                      static_cast<int>(idx / static_cast<std::uint32_t>(spec.width)), c.r, c.g, c.b);
    }
    blob.intended = classify_region(blob.d_norm, blob.spec.related ? 1.0 : 0.0, f.truth.alpha, f.truth.beta);
  }
  return f;
}

FixtureSpec group_preset(Group group, std::uint64_t seed, int size) {
  if (size < kMinPresetSize) {
    throw Error(fmt::format("preset fixtures need a side of at least {} px, got {}", kMinPresetSize, size));
  }
  const double scale = static_cast<double>(size) / 1024.0;
  for (int attempt = 0; attempt < kPresetAttempts; ++attempt) {
    std::mt19937_64 rng(splitmix64(seed + static_cast<std::uint64_t>(attempt) * 0x632BE59BD9B4E019ull));
    FixtureSpec spec;
    spec.width = spec.height = size;
    spec.seed = splitmix64(seed ^ static_cast<std::uint64_t>(attempt));
    spec.group = group;
    const int w = static_cast<int>(std::lround(uniform_int(rng, 80, 110) * scale));
    const int h = static_cast<int>(std::lround(uniform_int(rng, 50, 70) * scale));
    const int jitter = static_cast<int>(std::lround(40 * scale));
    const int cx = size / 2 + uniform_int(rng, -jitter, jitter);
    const int cy = size / 2 + uniform_int(rng, -jitter, jitter);
    spec.box = {cx - w / 2, cy - h / 2, cx - w / 2 + w, cy - h / 2 + h};

    int count = 0;
    double d_lo = 0.0, d_hi = 0.0;
    bool related = false;
    switch (group) {
      case Group::A: count = uniform_int(rng, 2, 4), d_lo = 0.5, d_hi = 1.4, related = false; break;
      case Group::B: count = uniform_int(rng, 2, 4), d_lo = 1.6, d_hi = 5.0, related = true; break;
      case Group::C: count = uniform_int(rng, 1, 2), d_lo = 1.6, d_hi = 5.0, related = false; break;
    }
    for (int i = 0; i < count; ++i) {
      BlobSpec b;
      b.distance_units = uniform_real(rng, d_lo, d_hi);
      b.area = uniform_int(rng, 400, 2000);
      b.related = related;
      b.contrast = spec.edit_contrast;
      spec.blobs.push_back(b);
    }
    try {
      spec.validate();
      place_blobs(spec);
      return spec;
    } catch (const Error&) {
      // redraw
    }
  }
  throw Error(fmt::format("no placeable group {} preset for seed {} at size {}", to_string(group), seed, size));
}

void to_json(nlohmann::json& j, const GroundTruth& t) {
  j = nlohmann::json::object();
  j["seed"] = t.seed;
  j["group"] = t.group ? nlohmann::json(to_string(*t.group)) : nlohmann::json(nullptr);
  j["edit_box"] = {t.box.x_min, t.box.y_min, t.box.x_max, t.box.y_max};
  j["edit_patch"] = {t.edit_patch.x_min, t.edit_patch.y_min, t.edit_patch.x_max, t.edit_patch.y_max};
  j["alpha"] = t.alpha;
  j["beta"] = t.beta;
  auto blobs = nlohmann::json::array();
  for (const auto& b : t.blobs) {
    blobs.push_back({{"distance_target", b.spec.distance_units},
                     {"d_norm", b.d_norm},
                     {"area_target", b.spec.area},
                     {"area", b.pixels.size()},
                     {"related", b.spec.related},
                     {"contrast", b.spec.contrast},
                     {"bbox", {b.bbox.x_min, b.bbox.y_min, b.bbox.x_max, b.bbox.y_max}},
                     {"centroid", {b.centroid.x, b.centroid.y}},
                     {"intended_class", to_string(b.intended)},
                     {"pixels", b.pixels}});
  }
  j["blobs"] = blobs;
}

DatasetManifest write_synthetic_dataset(const SynthOptions& opts, const std::filesystem::path& out_dir) {
  if (opts.count < 1) throw Error("fixture count must be positive");
  if (opts.groups.empty()) throw Error("no fixture groups given");
  if (opts.models.empty()) throw Error("no model names given");
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "original");
  fs::create_directories(out_dir / "truth");
  for (const auto& m : opts.models) fs::create_directories(out_dir / m);

  DatasetManifest manifest;
  manifest.base_dir = out_dir;
  manifest.entries.resize(static_cast<std::size_t>(opts.count));
  std::vector<std::string> errors(static_cast<std::size_t>(opts.count));

#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, opts.workers))
  for (int i = 0; i < opts.count; ++i) {
    try {
      const Group g = opts.groups[static_cast<std::size_t>(i) % opts.groups.size()];
      const auto spec = group_preset(g, fixture_seed(opts.seed, static_cast<std::uint64_t>(i)), opts.size);
      const auto f = gen_fixture(spec);
      const std::string id = fmt::format("syn_{:04d}", i);
      write_png(out_dir / "original" / (id + ".png"), f.original, opts.png_compression);
      const auto gen_png = encode_png(f.generated, opts.png_compression);
      ManifestEntry e;
      e.image_id = id;
      e.category = fmt::format("group_{}", to_string(g));
      e.group = g;
      e.original_path = "original/" + id + ".png";
      e.edit_box = f.box;
      for (const auto& m : opts.models) {
        const auto rel = m + "/" + id + ".png";
        std::ofstream out(out_dir / rel, std::ios::binary);
        out.write(reinterpret_cast<const char*>(gen_png.data()), static_cast<std::streamsize>(gen_png.size()));
        if (!out) throw Error(fmt::format("cannot write {}", (out_dir / rel).string()));
        e.generated[m] = rel;
      }
      nlohmann::json truth;
      to_json(truth, f.truth);
      std::ofstream tout(out_dir / "truth" / (id + ".json"));
      tout << truth.dump() << "\n";
      manifest.entries[static_cast<std::size_t>(i)] = std::move(e);
    } catch (const std::exception& ex) {
      errors[static_cast<std::size_t>(i)] = ex.what();
    }
  }
  for (int i = 0; i < opts.count; ++i) {
    if (!errors[static_cast<std::size_t>(i)].empty()) {
      throw Error(fmt::format("fixture {}: {}", i, errors[static_cast<std::size_t>(i)]));
    }
  }
  save_manifest(manifest, out_dir / "manifest.json");
  return load_manifest(out_dir / "manifest.json");
}

}  // namespace spillprobe
