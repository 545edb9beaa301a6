#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "spillprobe/metrics.hpp"

namespace sp = spillprobe;

namespace {

sp::ImageAnalysis planted(const std::string& id, std::int64_t spat, std::int64_t sem, std::int64_t mix,
                          std::int64_t rnd, double spill, double ssim) {
  sp::ImageAnalysis a;
  a.image_id = id;
  a.model = "m";
  a.spill_rate = spill;
  a.ssim = ssim;
  a.counts = {spat, sem, mix, rnd};
  a.total_spillover_area = 100 * a.counts.total();
  return a;
}

}  // namespace

TEST(Wus, WorkedExamples) {
  EXPECT_NEAR(*sp::wus({2, 8, 0, 0}, 0.01, 5).value, 3.980, 0.001);
  EXPECT_EQ(sp::wus({2, 8, 0, 0}, 0.01, 5).to_string(1), "4.0");
  EXPECT_EQ(sp::wus({40, 60, 0, 0}, 0.01, 5).to_string(1), "1.5");
  EXPECT_TRUE(sp::wus({1, 2, 1, 0}, 0.01, 5).is_na());
  EXPECT_FALSE(sp::wus({1, 2, 1, 1}, 0.01, 5).is_na());
  EXPECT_EQ(sp::wus({1, 2, 1, 0}, 0.01, 5).to_string(), "N/A");
  EXPECT_NEAR(*sp::wus({0, 5, 0, 0}, 0.01, 5).value, 500.0, 1e-9);
}

TEST(SemanticDensity, TableArithmetic) {
  EXPECT_NEAR(sp::semantic_density(5561, 200), 27.8, 0.05);
  EXPECT_NEAR(sp::semantic_density(3222, 198), 16.3, 0.05);
  EXPECT_THROW(sp::semantic_density(10, 0), sp::Error);
}

TEST(Aggregate, MatchesIndependentRecount) {
  std::mt19937_64 rng(51);
  std::vector<sp::ImageAnalysis> v;
  for (int i = 0; i < 20; ++i) {
    v.push_back(planted("i" + std::to_string(i), static_cast<std::int64_t>(rng() % 6),
                        static_cast<std::int64_t>(rng() % 9), static_cast<std::int64_t>(rng() % 4),
                        static_cast<std::int64_t>(rng() % 7), static_cast<double>(rng() % 1000) / 10000.0,
                        0.8 + static_cast<double>(rng() % 200) / 1000.0));
  }
  const auto agg = sp::aggregate(v, 0.01, 5);

  // Spreadsheet-style recount.
  double spill = 0, ssim = 0, regions = 0, wus_sum = 0;
  std::int64_t s = 0, m = 0, x = 0, r = 0, wus_n = 0;
  for (const auto& a : v) {
    spill += a.spill_rate;
    ssim += a.ssim;
    regions += static_cast<double>(a.counts.total());
    s += a.counts.spatial;
    m += a.counts.semantic;
    x += a.counts.mixed;
    r += a.counts.random;
    if (a.counts.total() >= 5) {
      wus_sum += static_cast<double>(a.counts.semantic) / (static_cast<double>(a.counts.spatial) + 0.01);
      ++wus_n;
    }
  }
  const double total = static_cast<double>(s + m + x + r);
  EXPECT_EQ(agg.images_used, 20);
  EXPECT_NEAR(agg.mean_spill_rate, 100.0 * spill / 20, 1e-9);
  EXPECT_NEAR(agg.mean_ssim, ssim / 20, 1e-12);
  EXPECT_NEAR(agg.mean_regions_per_image, regions / 20, 1e-12);
  EXPECT_NEAR(agg.class_proportions[0], 100.0 * static_cast<double>(s) / total, 1e-9);
  EXPECT_NEAR(agg.class_proportions[1], 100.0 * static_cast<double>(m) / total, 1e-9);
  EXPECT_NEAR(agg.class_proportions[2], 100.0 * static_cast<double>(x) / total, 1e-9);
  EXPECT_NEAR(agg.class_proportions[3], 100.0 * static_cast<double>(r) / total, 1e-9);
  EXPECT_EQ(agg.wus_valid_images, wus_n);
  EXPECT_NEAR(*agg.wus_aggregate.value, wus_sum / static_cast<double>(wus_n), 1e-9);
  EXPECT_NEAR(*agg.wus_pooled.value, static_cast<double>(m) / (static_cast<double>(s) + 0.01), 1e-9);
  EXPECT_EQ(agg.semantic_total, m);
  EXPECT_NEAR(agg.semantic_density, static_cast<double>(m) / 20, 1e-12);
  EXPECT_EQ(agg.total_spillover_area, 100 * static_cast<std::int64_t>(total));
}

TEST(Aggregate, IndependentOfInputOrder) {
  std::mt19937_64 rng(52);
  std::vector<sp::ImageAnalysis> v;
  for (int i = 0; i < 50; ++i) {
    v.push_back(planted("i" + std::to_string(i), static_cast<std::int64_t>(rng() % 6),
                        static_cast<std::int64_t>(rng() % 9), 1, 2, static_cast<double>(rng() % 997) / 7919.0,
                        static_cast<double>(rng() % 991) / 1000.0));
  }
  const auto a = sp::aggregate(v, 0.01, 5);
  std::shuffle(v.begin(), v.end(), rng);
  const auto b = sp::aggregate(v, 0.01, 5);
  EXPECT_EQ(a.mean_spill_rate, b.mean_spill_rate);
  EXPECT_EQ(a.mean_ssim, b.mean_ssim);
  EXPECT_EQ(a.wus_aggregate, b.wus_aggregate);
  EXPECT_EQ(a.class_proportions_per_image, b.class_proportions_per_image);
}

TEST(Aggregate, OnePerClassIsEvenSplit) {
  const std::vector<sp::ImageAnalysis> v{planted("a", 1, 1, 1, 1, 0.1, 0.9)};
  const auto agg = sp::aggregate(v, 0.01, 5);
  for (double p : agg.class_proportions) EXPECT_DOUBLE_EQ(p, 25.0);
  EXPECT_TRUE(agg.wus_aggregate.is_na());
}

TEST(Aggregate, FailuresExcludedAndModelsNotMixed) {
  std::vector<sp::ImageAnalysis> v{planted("a", 2, 8, 0, 0, 0.1, 0.9), planted("b", 0, 0, 0, 0, 0.0, 1.0)};
  v[1].failed = true;
  const auto agg = sp::aggregate(v, 0.01, 5);
  EXPECT_EQ(agg.images_used, 1);
  EXPECT_EQ(agg.images_failed, 1);
  EXPECT_NEAR(agg.mean_ssim, 0.9, 1e-12);

  v[1].failed = false;
  v[1].model = "other";
  EXPECT_THROW(sp::aggregate(v, 0.01, 5), sp::Error);
  EXPECT_THROW(sp::aggregate({}, 0.01, 5), sp::Error);
  std::vector<sp::ImageAnalysis> all_failed{planted("c", 0, 0, 0, 0, 0, 1)};
  all_failed[0].failed = true;
  EXPECT_THROW(sp::aggregate(all_failed, 0.01, 5), sp::Error);
}
