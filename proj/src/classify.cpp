#include "spillprobe/classify.hpp"

#include <cmath>

#include <fmt/format.h>

namespace spillprobe {

std::string to_string(RegionClass c) {
  switch (c) {
    case RegionClass::kSpatial: return "spatial";
    case RegionClass::kSemantic: return "semantic";
    case RegionClass::kMixed: return "mixed";
    case RegionClass::kRandom: return "random";
  }
  return "random";
}

RegionClass parse_region_class(const std::string& text) {
  for (auto c : kAllClasses) {
    if (to_string(c) == text) return c;
  }
  throw Error(fmt::format("unknown region class '{}'", text));
}

std::int64_t& ClassCounts::operator[](RegionClass c) {
  switch (c) {
    case RegionClass::kSpatial: return spatial;
    case RegionClass::kSemantic: return semantic;
    case RegionClass::kMixed: return mixed;
    case RegionClass::kRandom: return random;
  }
  return random;
}

std::int64_t ClassCounts::operator[](RegionClass c) const {
  return const_cast<ClassCounts&>(*this)[c];
}

ClassCounts& ClassCounts::operator+=(const ClassCounts& o) {
  spatial += o.spatial;
  semantic += o.semantic;
  mixed += o.mixed;
  random += o.random;
  return *this;
}

double normalized_distance(const Point& centroid, const EditBox& box) {
  const Point c = box_center(box);
  return std::hypot(centroid.x - c.x, centroid.y - c.y) / box_diag(box);
}

RegionClass classify_region(double d_norm, double similarity, double alpha, double beta) {
  const bool near = d_norm < alpha;
  const bool related = similarity > beta;
  if (near) return related ? RegionClass::kMixed : RegionClass::kSpatial;
  return related ? RegionClass::kSemantic : RegionClass::kRandom;
}

ClassCounts count_classes(const std::vector<RegionFeature>& features, double alpha, double beta) {
  ClassCounts counts;
  for (const auto& f : features) ++counts[classify_region(f.d_norm, f.similarity, alpha, beta)];
  return counts;
}

ImageAnalysis classify_image(const DetectionResult& det, const ImageBuf& gen, const EditBox& box, Embedder& embedder,
                             const ProbeConfig& cfg, const std::string& image_id, const std::string& model,
                             EmbeddingCache* cache) {
  ImageAnalysis out;
  out.image_id = image_id;
  out.model = model;
  out.spill_rate = det.spill_rate;
  out.ssim = det.ssim_non_edit;
  if (det.regions.empty()) return out;

  const EmbeddingCache::Key key{model, image_id, "editbox"};
  std::optional<EmbeddingVector> edit_feature;
  if (cache) edit_feature = cache->get(key);

  // The edit crop rides along in the same batched call when it is not cached.
  std::vector<ImageBuf> crops;
  crops.reserve(det.regions.size() + 1);
  if (!edit_feature) crops.push_back(crop_with_pad(gen, box.rect(), cfg.pad));
  for (const auto& r : det.regions) crops.push_back(crop_with_pad(gen, r.bbox, cfg.pad));

  std::vector<EmbeddingVector> vectors;
  try {
    vectors = embed_batch(crops, embedder, cfg.embed_batch);
  } catch (const Error& e) {
    out.failed = true;
    out.error = e.what();
    return out;
  }
  std::size_t first_region = 0;
  if (!edit_feature) {
    edit_feature = vectors.front();
    first_region = 1;
    if (cache) cache->put(key, *edit_feature);
  }

  const double diag = box_diag(box);
  out.regions.reserve(det.regions.size());
  for (std::size_t i = 0; i < det.regions.size(); ++i) {
    const auto& raw = det.regions[i];
    SpilloverRegion r;
    r.bbox = raw.bbox;
    r.centroid = raw.centroid;
    r.area = raw.area;
    r.d_pixels = i < det.distances.size() ? det.distances[i] : normalized_distance(raw.centroid, box) * diag;
    r.d_norm = r.d_pixels / diag;
    try {
      r.similarity = cosine_sim(*edit_feature, vectors[first_region + i]);
    } catch (const Error& e) {
      out.failed = true;
      out.error = e.what();
      out.regions.clear();
      out.counts = {};
      out.total_spillover_area = 0;
      return out;
    }
    r.cls = classify_region(r.d_norm, r.similarity, cfg.alpha, cfg.beta);
    ++out.counts[r.cls];
    out.total_spillover_area += r.area;
    out.regions.push_back(r);
  }
  return out;
}

}  // namespace spillprobe
