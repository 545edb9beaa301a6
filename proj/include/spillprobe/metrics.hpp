#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "spillprobe/classify.hpp"

namespace spillprobe {

/// A WUS value, or N/A when the image had too few regions to be stable.
struct WusValue {
  std::optional<double> value;

  bool is_na() const { return !value.has_value(); }
  std::string to_string(int decimals = 2) const;

  friend bool operator==(const WusValue&, const WusValue&) = default;
};

/// semantic / (spatial + epsilon), or N/A when counts.total() < min_regions.
WusValue wus(const ClassCounts& counts, double epsilon, int min_regions);

/// Semantic regions per image. Throws when images_used is zero.
double semantic_density(std::int64_t semantic_total, std::int64_t images_used);

/// Mean of the per-image WUS values that are not N/A; N/A when all are.
/// `valid_images` receives the number of images that contributed.
WusValue mean_image_wus(std::span<const ClassCounts> per_image, double epsilon, int min_regions,
                        std::int64_t* valid_images = nullptr);

struct ModelAggregate {
  std::string model;
  std::int64_t images_used = 0;
  std::int64_t images_failed = 0;
  double mean_spill_rate = 0.0;  // percent
  double mean_ssim = 0.0;
  double mean_regions_per_image = 0.0;
  ClassCounts totals;
  std::array<double, 4> class_proportions{};            // percent, region-pooled, kAllClasses order
  std::array<double, 4> class_proportions_per_image{};  // percent, mean over images with regions
  WusValue wus_aggregate;       // mean of per-image WUS over non-N/A images
  std::int64_t wus_valid_images = 0;
  WusValue wus_pooled;          // pooled semantic / (pooled spatial + epsilon)
  std::int64_t semantic_total = 0;
  double semantic_density = 0.0;
  std::int64_t total_spillover_area = 0;
  double mean_spillover_area = 0.0;
};

/// Aggregates one model's analyses. Failed analyses are counted but excluded
/// from every mean. The result does not depend on input order.
ModelAggregate aggregate(std::span<const ImageAnalysis> analyses, double epsilon, int min_regions);

}  // namespace spillprobe
