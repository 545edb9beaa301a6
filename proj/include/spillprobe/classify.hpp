#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spillprobe/config.hpp"
#include "spillprobe/core.hpp"
#include "spillprobe/detect.hpp"
#include "spillprobe/embed.hpp"

namespace spillprobe {

enum class RegionClass { kSpatial, kSemantic, kMixed, kRandom };

inline constexpr std::array<RegionClass, 4> kAllClasses = {RegionClass::kSpatial, RegionClass::kSemantic,
                                                          RegionClass::kMixed, RegionClass::kRandom};

std::string to_string(RegionClass c);
RegionClass parse_region_class(const std::string& text);

struct ClassCounts {
  std::int64_t spatial = 0;
  std::int64_t semantic = 0;
  std::int64_t mixed = 0;
  std::int64_t random = 0;

  std::int64_t total() const { return spatial + semantic + mixed + random; }
  std::int64_t& operator[](RegionClass c);
  std::int64_t operator[](RegionClass c) const;
  ClassCounts& operator+=(const ClassCounts& o);

  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

/// The (distance, similarity) pair that fully determines a region's class.
struct RegionFeature {
  double d_norm = 0.0;
  double similarity = 0.0;
};

struct SpilloverRegion {
  Rect bbox;
  Point centroid;
  std::int64_t area = 0;
  double d_pixels = 0.0;
  double d_norm = 0.0;
  double similarity = 0.0;
  RegionClass cls = RegionClass::kRandom;

  RegionFeature feature() const { return {d_norm, similarity}; }
};

struct ImageAnalysis {
  std::string image_id;
  std::string model;
  bool failed = false;
  std::string error;
  double spill_rate = 0.0;
  double ssim = 1.0;
  std::vector<SpilloverRegion> regions;
  ClassCounts counts;
  std::int64_t total_spillover_area = 0;
};

/// Centroid-to-box-center distance in units of the box diagonal.
double normalized_distance(const Point& centroid, const EditBox& box);

/// Near means d < alpha, related means s > beta. Ties go to far / unrelated.
RegionClass classify_region(double d_norm, double similarity, double alpha, double beta);

ClassCounts count_classes(const std::vector<RegionFeature>& features, double alpha, double beta);

/// Embeds the padded edit-box crop and every padded region crop of the
/// generated image, then assigns distance, similarity and class per region.
/// The edit-region feature is looked up in / stored to `cache` when given.
/// Provider failures produce an analysis with failed = true.
ImageAnalysis classify_image(const DetectionResult& det, const ImageBuf& gen, const EditBox& box, Embedder& embedder,
                             const ProbeConfig& cfg, const std::string& image_id = {},
                             const std::string& model = {}, EmbeddingCache* cache = nullptr);

}  // namespace spillprobe
