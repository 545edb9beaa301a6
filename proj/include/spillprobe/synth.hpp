#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "spillprobe/classify.hpp"
#include "spillprobe/core.hpp"
#include "spillprobe/manifest.hpp"

namespace spillprobe {

struct BlobSpec {
  double distance_units = 1.0;  // target d_norm
  std::int64_t area = 400;      // pixels
  bool related = false;
  int contrast = 40;            // luma delta against the background

  friend bool operator==(const BlobSpec&, const BlobSpec&) = default;
};

struct FixtureSpec {
  int width = 1024;
  int height = 1024;
  EditBox box;
  std::vector<BlobSpec> blobs;
  std::uint64_t seed = 0;
  std::optional<Group> group;
  int edit_contrast = 40;  // luma delta of the recolored in-box patch

  void validate() const;
};

struct PlantedBlob {
  BlobSpec spec;
  Rect bbox;
  std::vector<std::uint32_t> pixels;  // y * width + x, ascending
  Point centroid;                     // mean integer coordinate
  double d_norm = 0.0;                // realised
  RegionClass intended = RegionClass::kRandom;
};

struct GroundTruth {
  std::uint64_t seed = 0;
  std::optional<Group> group;
  EditBox box;
  Rect edit_patch;  // pixels changed inside the box
  std::vector<PlantedBlob> blobs;
  double alpha = 1.5;
  double beta = 0.80;
};

struct Fixture {
  ImageBuf original;
  ImageBuf generated;
  EditBox box;
  GroundTruth truth;
};

/// Blob centroids land within this distance (diagonal units) of their target.
inline constexpr double kPlacementTolerance = 0.05;

/// Throws Error naming the first blob that cannot be placed.
Fixture gen_fixture(const FixtureSpec& spec);

/// Below this side the scaled edit patch is too small for crop similarity to
/// separate related from unrelated blobs.
inline constexpr int kMinPresetSize = 768;

/// Randomised A/B/C preset whose blobs are known to be placeable.
FixtureSpec group_preset(Group group, std::uint64_t seed, int size = 1024);

/// Seed of fixture `index` in a run started from `seed`.
std::uint64_t fixture_seed(std::uint64_t seed, std::uint64_t index);

void to_json(nlohmann::json& j, const GroundTruth& t);

/// Luma-neutral RGB for a target luma with fixed red and blue.
struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
};
Rgb related_color(int contrast);
Rgb unrelated_color(int contrast);

struct SynthOptions {
  std::vector<Group> groups;  // cycled over fixtures
  int count = 1;
  std::uint64_t seed = 1;
  int size = 1024;
  std::vector<std::string> models = {"synthetic"};
  int workers = 1;
  int png_compression = 0;  // the noise background does not compress
};

/// Writes original/<id>.png, <model>/<id>.png, truth/<id>.json and
/// manifest.json under `out_dir`. Returns the manifest.
DatasetManifest write_synthetic_dataset(const SynthOptions& opts, const std::filesystem::path& out_dir);

}  // namespace spillprobe
