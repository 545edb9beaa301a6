#include "spillprobe/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include <fmt/format.h>

namespace spillprobe {
namespace {

// Sorting first makes the floating-point sum independent of input order.
double order_free_mean(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace

std::string WusValue::to_string(int decimals) const {
  if (is_na()) return "N/A";
  return fmt::format("{:.{}f}", *value, decimals);
}

WusValue wus(const ClassCounts& counts, double epsilon, int min_regions) {
  if (counts.total() < min_regions) return {};
  return {static_cast<double>(counts.semantic) / (static_cast<double>(counts.spatial) + epsilon)};
}

double semantic_density(std::int64_t semantic_total, std::int64_t images_used) {
  if (images_used <= 0) throw Error("semantic density needs at least one image");
  return static_cast<double>(semantic_total) / static_cast<double>(images_used);
}

WusValue mean_image_wus(std::span<const ClassCounts> per_image, double epsilon, int min_regions,
                        std::int64_t* valid_images) {
  std::vector<double> values;
  for (const auto& c : per_image) {
    if (auto w = wus(c, epsilon, min_regions); !w.is_na()) values.push_back(*w.value);
  }
  if (valid_images) *valid_images = static_cast<std::int64_t>(values.size());
  if (values.empty()) return {};
  return {order_free_mean(std::move(values))};
}

ModelAggregate aggregate(std::span<const ImageAnalysis> analyses, double epsilon, int min_regions) {
  if (analyses.empty()) throw Error("cannot aggregate an empty set of analyses");
  ModelAggregate agg;
  agg.model = analyses.front().model;

  std::vector<double> spill, ssim, regions, area;
  std::vector<ClassCounts> image_counts;
  std::array<std::vector<double>, 4> per_image_props;
  for (const auto& a : analyses) {
    if (a.model != agg.model) {
      throw Error(fmt::format("aggregate mixes models '{}' and '{}'", agg.model, a.model));
    }
    if (a.failed) {
      ++agg.images_failed;
      continue;
    }
    ++agg.images_used;
    spill.push_back(a.spill_rate);
    ssim.push_back(a.ssim);
    regions.push_back(static_cast<double>(a.counts.total()));
    area.push_back(static_cast<double>(a.total_spillover_area));
    agg.totals += a.counts;
    agg.total_spillover_area += a.total_spillover_area;
    image_counts.push_back(a.counts);
    if (a.counts.total() > 0) {
      for (std::size_t k = 0; k < kAllClasses.size(); ++k) {
        per_image_props[k].push_back(100.0 * static_cast<double>(a.counts[kAllClasses[k]]) /
                                     static_cast<double>(a.counts.total()));
      }
    }
  }
  if (agg.images_used == 0) {
    throw Error(fmt::format("model '{}' has no successfully analysed images", agg.model));
  }

  agg.mean_spill_rate = 100.0 * order_free_mean(spill);
  agg.mean_ssim = order_free_mean(ssim);
  agg.mean_regions_per_image = order_free_mean(regions);
  agg.mean_spillover_area = order_free_mean(area);
  const auto total = agg.totals.total();
  for (std::size_t k = 0; k < kAllClasses.size(); ++k) {
    agg.class_proportions[k] =
        total > 0 ? 100.0 * static_cast<double>(agg.totals[kAllClasses[k]]) / static_cast<double>(total) : 0.0;
    agg.class_proportions_per_image[k] = order_free_mean(per_image_props[k]);
  }
  agg.wus_aggregate = mean_image_wus(image_counts, epsilon, min_regions, &agg.wus_valid_images);
  agg.wus_pooled = wus(agg.totals, epsilon, min_regions);
  agg.semantic_total = agg.totals.semantic;
  agg.semantic_density = semantic_density(agg.semantic_total, agg.images_used);
  return agg;
}

}  // namespace spillprobe
