#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "spillprobe/config.hpp"
#include "spillprobe/core.hpp"

namespace spillprobe {

class EmbeddingError : public Error {
 public:
  using Error::Error;
};

struct EmbeddingVector {
  std::vector<float> values;

  std::size_t dim() const { return values.size(); }
  double norm() const;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

/// Tolerance on provider output norms.
inline constexpr double kUnitNormTolerance = 1e-4;

/// Crop of `bbox` grown by `pad` on each side, clamped to the image.
Rect padded_rect(const Rect& bbox, int pad, int width, int height);
ImageBuf crop_with_pad(const ImageBuf& img, const Rect& bbox, int pad);

/// dot(a, b) / (|a| |b|). Throws EmbeddingError on dimension mismatch or a zero vector.
double cosine_sim(const EmbeddingVector& a, const EmbeddingVector& b);

/// 8 uniform bins per RGB channel, concatenated, L2-normalized (24 values).
EmbeddingVector reference_embed(const ImageBuf& crop);

/// Embedding provider. Implementations must accept concurrent calls.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::string name() const = 0;
  /// Embeds one chunk; the caller keeps chunks within the provider limit.
  virtual std::vector<EmbeddingVector> embed_chunk(std::span<const ImageBuf> crops) = 0;
  /// Largest chunk the provider accepts.
  virtual std::size_t max_chunk() const { return 64; }
};

class ReferenceEmbedder final : public Embedder {
 public:
  std::string name() const override { return "reference-histogram"; }
  std::vector<EmbeddingVector> embed_chunk(std::span<const ImageBuf> crops) override;
  std::size_t max_chunk() const override { return static_cast<std::size_t>(-1); }
};

/// Client for the sidecar embedding service: POST /embed with base64 PNGs.
class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(EmbedderSpec spec, int retries = 3);

  std::string name() const override { return "remote:" + spec_.endpoint; }
  std::vector<EmbeddingVector> embed_chunk(std::span<const ImageBuf> crops) override;

  /// GET /health; returns the reported dimension and checks it against the spec.
  int check_health();

 private:
  std::vector<EmbeddingVector> post_once(std::span<const ImageBuf> crops);

  EmbedderSpec spec_;
  int retries_;
  std::counting_semaphore<1024> in_flight_;
  std::mutex dim_mutex_;
  int dim_ = 0;
};

std::unique_ptr<Embedder> make_embedder(const EmbedderSpec& spec);

/// Order-preserving, chunked embedding. Every vector is checked to be unit norm.
/// Failures name the chunk that failed.
std::vector<EmbeddingVector> embed_batch(std::span<const ImageBuf> crops, Embedder& embedder, int batch);

/// Thread-safe memo of per-image edit-region features.
class EmbeddingCache {
 public:
  using Key = std::tuple<std::string, std::string, std::string>;  // model, image_id, tag

  std::optional<EmbeddingVector> get(const Key& key) const;
  void put(const Key& key, EmbeddingVector v);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<Key, EmbeddingVector> entries_;
};

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

}  // namespace spillprobe
