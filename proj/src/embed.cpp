#include "spillprobe/embed.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "spillprobe/image_io.hpp"

namespace spillprobe {

double EmbeddingVector::norm() const {
  double s = 0.0;
  for (float v : values) s += static_cast<double>(v) * v;
  return std::sqrt(s);
}

Rect padded_rect(const Rect& bbox, int pad, int width, int height) {
  return {std::max(0, bbox.x_min - pad), std::max(0, bbox.y_min - pad), std::min(width, bbox.x_max + pad),
          std::min(height, bbox.y_max + pad)};
}

ImageBuf crop_with_pad(const ImageBuf& img, const Rect& bbox, int pad) {
  if (bbox.empty() || bbox.x_min < 0 || bbox.y_min < 0 || bbox.x_max > img.width() ||
      bbox.y_max > img.height()) {
    throw Error(fmt::format("crop ({},{},{},{}) is not inside the {}x{} image", bbox.x_min, bbox.y_min,
                            bbox.x_max, bbox.y_max, img.width(), img.height()));
  }
  const Rect r = padded_rect(bbox, std::max(pad, 0), img.width(), img.height());
  ImageBuf out(r.width(), r.height());
  for (int y = 0; y < r.height(); ++y) {
    const auto* src = img.pixel(r.x_min, r.y_min + y);
    std::copy(src, src + static_cast<std::size_t>(r.width()) * ImageBuf::kChannels, out.pixel(0, y));
  }
  return out;
}

double cosine_sim(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw EmbeddingError(fmt::format("cannot compare embeddings of dimension {} and {}", a.dim(), b.dim()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) dot += static_cast<double>(a.values[i]) * b.values[i];
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw EmbeddingError("cosine similarity of a zero vector");
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

EmbeddingVector reference_embed(const ImageBuf& crop) {
  if (crop.empty()) throw EmbeddingError("cannot embed an empty crop");
  std::array<std::int64_t, 24> hist{};
  const auto& d = crop.data();
  for (std::size_t i = 0; i < d.size(); i += 3) {
    ++hist[d[i] >> 5];
    ++hist[8 + (d[i + 1] >> 5)];
    ++hist[16 + (d[i + 2] >> 5)];
  }
  double sq = 0.0;
  for (auto c : hist) sq += static_cast<double>(c) * static_cast<double>(c);
  const double n = std::sqrt(sq);
  EmbeddingVector v;
  v.values.resize(hist.size());
  for (std::size_t i = 0; i < hist.size(); ++i) v.values[i] = static_cast<float>(hist[i] / n);
  return v;
}

std::vector<EmbeddingVector> ReferenceEmbedder::embed_chunk(std::span<const ImageBuf> crops) {
  std::vector<EmbeddingVector> out;
  out.reserve(crops.size());
  for (const auto& c : crops) out.push_back(reference_embed(c));
  return out;
}

namespace {

struct Endpoint {
  std::string host;    // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.host = url.substr(0, path_start);
  if (path_start != std::string::npos) {
    ep.prefix = url.substr(path_start);
    while (!ep.prefix.empty() && ep.prefix.back() == '/') ep.prefix.pop_back();
  }
  return ep;
}

class PermitGuard {
 public:
  explicit PermitGuard(std::counting_semaphore<1024>& s) : s_(s) { s_.acquire(); }
  ~PermitGuard() { s_.release(); }
  PermitGuard(const PermitGuard&) = delete;
  PermitGuard& operator=(const PermitGuard&) = delete;

 private:
  std::counting_semaphore<1024>& s_;
};

// 4xx responses are the caller's fault and are not retried.
class PermanentFailure : public EmbeddingError {
 public:
  using EmbeddingError::EmbeddingError;
};

}  // namespace

RemoteEmbedder::RemoteEmbedder(EmbedderSpec spec, int retries)
    : spec_(std::move(spec)), retries_(std::max(retries, 1)),
      in_flight_(std::clamp(spec_.max_in_flight, 1, 1024)) {
  spec_.validate();
}

int RemoteEmbedder::check_health() {
  const auto ep = split_endpoint(spec_.endpoint);
  httplib::Client client(ep.host);
  client.set_connection_timeout(5);
  client.set_read_timeout(30);
  auto res = client.Get(ep.prefix + "/health");
  if (!res) {
    throw EmbeddingError(fmt::format("embedding service {} unreachable: {}", spec_.endpoint,
                                     httplib::to_string(res.error())));
  }
  if (res->status != 200) {
    throw EmbeddingError(fmt::format("embedding service health check returned HTTP {}", res->status));
  }
  int dim = 0;
  try {
    dim = nlohmann::json::parse(res->body).at("dim").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw EmbeddingError(fmt::format("malformed /health response: {}", e.what()));
  }
  if (dim < 2) throw EmbeddingError(fmt::format("embedding service reports dimension {}", dim));
  if (spec_.dimension != 0 && dim != spec_.dimension) {
    throw EmbeddingError(fmt::format("embedding service dimension {} does not match expected {}", dim,
                                     spec_.dimension));
  }
  std::lock_guard lock(dim_mutex_);
  dim_ = dim;
  return dim;
}

std::vector<EmbeddingVector> RemoteEmbedder::post_once(std::span<const ImageBuf> crops) {
  nlohmann::json req;
  auto& images = req["images"] = nlohmann::json::array();
  for (const auto& c : crops) images.push_back(base64_encode(encode_png(c, 1)));

  const auto ep = split_endpoint(spec_.endpoint);
  httplib::Client client(ep.host);
  client.set_connection_timeout(5);
  client.set_read_timeout(300);
  httplib::Result res = [&] {
    PermitGuard permit(in_flight_);
    return client.Post(ep.prefix + "/embed", req.dump(), "application/json");
  }();
  if (!res) throw EmbeddingError(fmt::format("request failed: {}", httplib::to_string(res.error())));
  if (res->status >= 400 && res->status < 500) {
    throw PermanentFailure(fmt::format("HTTP {}: {}", res->status, res->body.substr(0, 200)));
  }
  if (res->status != 200) throw EmbeddingError(fmt::format("HTTP {}", res->status));

  std::vector<EmbeddingVector> out;
  try {
    const auto body = nlohmann::json::parse(res->body);
    const int dim = body.at("dim").get<int>();
    const auto& vectors = body.at("vectors");
    if (!vectors.is_array() || vectors.size() != crops.size()) {
      throw EmbeddingError(fmt::format("service returned {} vectors for {} images",
                                       vectors.is_array() ? vectors.size() : 0, crops.size()));
    }
    {
      std::lock_guard lock(dim_mutex_);
      if (dim != dim_) {
        throw EmbeddingError(fmt::format("service answered with dimension {} but /health reported {}", dim, dim_));
      }
    }
    for (const auto& v : vectors) {
      EmbeddingVector e;
      e.values = v.get<std::vector<float>>();
      if (static_cast<int>(e.dim()) != dim) {
        throw EmbeddingError(fmt::format("vector of length {} in a dimension-{} response", e.dim(), dim));
      }
      out.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw EmbeddingError(fmt::format("malformed /embed response: {}", e.what()));
  }
  return out;
}

std::vector<EmbeddingVector> RemoteEmbedder::embed_chunk(std::span<const ImageBuf> crops) {
  if (crops.size() > max_chunk()) {
    throw EmbeddingError(fmt::format("chunk of {} exceeds the service limit of {}", crops.size(), max_chunk()));
  }
  bool need_health = false;
  {
    std::lock_guard lock(dim_mutex_);
    need_health = dim_ == 0;
  }
  std::string last_error;
  for (int attempt = 1; attempt <= retries_; ++attempt) {
    try {
      if (need_health) {
        check_health();
        need_health = false;
      }
      return post_once(crops);
    } catch (const PermanentFailure& e) {
      throw EmbeddingError(e.what());
    } catch (const EmbeddingError& e) {
      last_error = e.what();
    }
    if (attempt < retries_) std::this_thread::sleep_for(std::chrono::milliseconds(100 * attempt));
  }
  throw EmbeddingError(fmt::format("{} after {} attempts", last_error, retries_));
}

std::unique_ptr<Embedder> make_embedder(const EmbedderSpec& spec) {
  spec.validate();
  if (spec.kind == EmbedderKind::kReferenceHistogram) return std::make_unique<ReferenceEmbedder>();
  return std::make_unique<RemoteEmbedder>(spec);
}

std::vector<EmbeddingVector> embed_batch(std::span<const ImageBuf> crops, Embedder& embedder, int batch) {
  if (crops.empty()) throw EmbeddingError("embed_batch needs at least one crop");
  if (batch < 1) throw EmbeddingError("batch size must be >= 1");
  const std::size_t chunk = std::min<std::size_t>(static_cast<std::size_t>(batch), embedder.max_chunk());
  const std::size_t chunks = (crops.size() + chunk - 1) / chunk;

  std::vector<EmbeddingVector> out;
  out.reserve(crops.size());
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t begin = c * chunk;
    const std::size_t len = std::min(chunk, crops.size() - begin);
    std::vector<EmbeddingVector> part;
    try {
      part = embedder.embed_chunk(crops.subspan(begin, len));
    } catch (const Error& e) {
      throw EmbeddingError(fmt::format("{}: chunk {}/{} (crops {}..{}) failed: {}", embedder.name(), c + 1, chunks,
                                       begin, begin + len - 1, e.what()));
    }
    if (part.size() != len) {
      throw EmbeddingError(fmt::format("{}: chunk {}/{} returned {} vectors for {} crops", embedder.name(), c + 1,
                                       chunks, part.size(), len));
    }
    for (std::size_t i = 0; i < part.size(); ++i) {
      const double n = part[i].norm();
      if (std::abs(n - 1.0) > kUnitNormTolerance) {
        throw EmbeddingError(fmt::format("{}: chunk {}/{} vector {} has norm {:.6f}, expected 1", embedder.name(),
                                         c + 1, chunks, begin + i, n));
      }
      out.push_back(std::move(part[i]));
    }
  }
  return out;
}

std::optional<EmbeddingVector> EmbeddingCache::get(const Key& key) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingCache::put(const Key& key, EmbeddingVector v) {
  std::lock_guard lock(mutex_);
  entries_.insert_or_assign(key, std::move(v));
}

std::size_t EmbeddingCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

namespace {
constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8) | bytes[i + 2];
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += kB64[(v >> 6) & 63];
    out += kB64[v & 63];
  }
  if (i < bytes.size()) {
    std::uint32_t v = std::uint32_t{bytes[i]} << 16;
    if (i + 1 < bytes.size()) v |= std::uint32_t{bytes[i + 1]} << 8;
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += i + 1 < bytes.size() ? kB64[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::vector<std::uint8_t> out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=') break;
    if (c == '\n' || c == '\r') continue;
    const int v = value(c);
    if (v < 0) throw Error("invalid base64 input");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xFF));
    }
  }
  return out;
}

}  // namespace spillprobe
