#include <gtest/gtest.h>

#include <atomic>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "oracles.hpp"
#include "spillprobe/embed.hpp"
#include "spillprobe/image_io.hpp"

namespace sp = spillprobe;

namespace {

sp::ImageBuf solid(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  sp::ImageBuf img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) img.set(x, y, r, g, b);
  }
  return img;
}

std::vector<sp::ImageBuf> random_crops(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<sp::ImageBuf> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(oracle::random_image(rng, 3 + static_cast<int>(rng() % 12), 3 + static_cast<int>(rng() % 12)));
  }
  return out;
}

class CountingEmbedder : public sp::Embedder {
 public:
  std::string name() const override { return "counting"; }
  std::vector<sp::EmbeddingVector> embed_chunk(std::span<const sp::ImageBuf> crops) override {
    sizes.push_back(crops.size());
    std::vector<sp::EmbeddingVector> out;
    for (const auto& c : crops) out.push_back(sp::reference_embed(c));
    if (bad_chunk && sizes.size() == *bad_chunk) out.back().values[0] += 0.5f;
    return out;
  }
  std::size_t max_chunk() const override { return limit; }
  std::vector<std::size_t> sizes;
  std::optional<std::size_t> bad_chunk;
  std::size_t limit = 64;
};

// In-process stand-in for the embedding service: reference histograms over HTTP.
class FakeService {
 public:
  explicit FakeService(int dim = 24) : dim_(dim) {
    server_.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(nlohmann::json{{"model", "fake"}, {"dim", dim_}, {"preprocess", "none"}}.dump(),
                      "application/json");
    });
    server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
      const int call = ++calls;
      if (call <= fail_first_with_500) {
        res.status = 500;
        return;
      }
      const auto body = nlohmann::json::parse(req.body);
      const auto& images = body.at("images");
      batch_sizes.push_back(images.size());
      if (images.size() > 64) {
        res.status = 413;
        return;
      }
      if (reject_call == call) {
        res.status = 400;
        res.set_content("bad image at index 0", "text/plain");
        return;
      }
      auto vectors = nlohmann::json::array();
      for (const auto& b64 : images) {
        const auto png = sp::base64_decode(b64.get<std::string>());
        vectors.push_back(sp::reference_embed(sp::decode_png(png)).values);
      }
      res.set_content(nlohmann::json{{"dim", 24}, {"vectors", vectors}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeService() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  std::atomic<int> calls{0};
  int fail_first_with_500 = 0;
  int reject_call = -1;
  std::vector<std::size_t> batch_sizes;

 private:
  int dim_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

sp::EmbedderSpec remote_spec(const std::string& url) { return sp::EmbedderSpec::parse("remote:" + url); }

}  // namespace

TEST(ReferenceEmbed, UnitNormAndDimension) {
  for (const auto& c : random_crops(10, 1)) {
    const auto v = sp::reference_embed(c);
    EXPECT_EQ(v.dim(), 24u);
    EXPECT_NEAR(v.norm(), 1.0, 1e-6);
  }
}

TEST(ReferenceEmbed, SolidColoursShareOnlyTheirCommonBins) {
  const auto red = sp::reference_embed(solid(8, 8, 255, 0, 0));
  const auto blue = sp::reference_embed(solid(8, 8, 0, 0, 255));
  // One shared bin (green = 0) out of three per-channel bins each.
  EXPECT_NEAR(sp::cosine_sim(red, blue), 1.0 / 3.0, 1e-6);
  EXPECT_NEAR(sp::cosine_sim(red, red), 1.0, 1e-6);
}

TEST(ReferenceEmbed, InvariantToPixelPermutation) {
  std::mt19937_64 rng(2);
  auto img = oracle::random_image(rng, 9, 7);
  auto shuffled = img;
  std::vector<int> order(63);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (int i = 0; i < 63; ++i) {
    const auto* p = img.pixel(order[i] % 9, order[i] / 9);
    shuffled.set(i % 9, i / 9, p[0], p[1], p[2]);
  }
  EXPECT_EQ(sp::reference_embed(img), sp::reference_embed(shuffled));
}

TEST(Cosine, Errors) {
  sp::EmbeddingVector a{{1.0f, 0.0f}}, b{{0.0f, 1.0f, 0.0f}}, z{{0.0f, 0.0f}};
  EXPECT_THROW(sp::cosine_sim(a, b), sp::EmbeddingError);
  EXPECT_THROW(sp::cosine_sim(a, z), sp::EmbeddingError);
  EXPECT_NEAR(sp::cosine_sim(a, sp::EmbeddingVector{{0.0f, 2.0f}}), 0.0, 1e-12);
}

TEST(Crop, PaddingClampsToImage) {
  EXPECT_EQ(sp::padded_rect({5, 5, 10, 10}, 10, 100, 100), (sp::Rect{0, 0, 20, 20}));
  EXPECT_EQ(sp::padded_rect({80, 40, 95, 50}, 10, 100, 60), (sp::Rect{70, 30, 100, 60}));
  sp::ImageBuf img(20, 20);
  img.set(3, 4, 1, 2, 3);
  const auto c = sp::crop_with_pad(img, {5, 5, 8, 8}, 2);
  EXPECT_EQ(c.width(), 7);
  EXPECT_EQ(c.pixel(0, 1)[2], 3);
}

TEST(EmbedBatch, ChunkedEqualsUnchunked) {
  const auto crops = random_crops(130, 3);
  CountingEmbedder chunked;
  const auto a = sp::embed_batch(crops, chunked, 64);
  EXPECT_EQ(chunked.sizes, (std::vector<std::size_t>{64, 64, 2}));
  CountingEmbedder whole;
  whole.limit = 1000;
  const auto b = sp::embed_batch(crops, whole, 1000);
  EXPECT_EQ(whole.sizes.size(), 1u);
  EXPECT_EQ(a, b);
  for (std::size_t i = 0; i < crops.size(); ++i) EXPECT_EQ(a[i], sp::reference_embed(crops[i]));
}

TEST(EmbedBatch, NonUnitVectorNamesChunk) {
  const auto crops = random_crops(10, 4);
  CountingEmbedder e;
  e.bad_chunk = 2;
  try {
    sp::embed_batch(crops, e, 4);
    FAIL() << "expected an error";
  } catch (const sp::EmbeddingError& err) {
    EXPECT_NE(std::string(err.what()).find("chunk 2/3"), std::string::npos) << err.what();
  }
  EXPECT_THROW(sp::embed_batch({}, e, 4), sp::EmbeddingError);
}

TEST(Base64, KnownVectorsAndRoundTrip) {
  const std::string s = "foobar";
  std::vector<std::uint8_t> bytes(s.begin(), s.end());
  EXPECT_EQ(sp::base64_encode(std::span(bytes).first(4)), "Zm9vYg==");
  EXPECT_EQ(sp::base64_encode(std::span(bytes).first(5)), "Zm9vYmE=");
  EXPECT_EQ(sp::base64_encode(bytes), "Zm9vYmFy");
  std::mt19937_64 rng(5);
  for (int n = 0; n < 40; ++n) {
    std::vector<std::uint8_t> v(static_cast<std::size_t>(n));
    for (auto& b : v) b = static_cast<std::uint8_t>(rng());
    EXPECT_EQ(sp::base64_decode(sp::base64_encode(v)), v);
  }
  EXPECT_THROW(sp::base64_decode("Zm9v!"), sp::Error);
}

TEST(Cache, KeyedByModelImageAndTag) {
  sp::EmbeddingCache cache;
  cache.put({"m1", "a", "editbox"}, sp::EmbeddingVector{{1.0f}});
  EXPECT_TRUE(cache.get({"m1", "a", "editbox"}).has_value());
  EXPECT_FALSE(cache.get({"m2", "a", "editbox"}).has_value());
}

TEST(RemoteEmbedder, OrderPreservedAndChunksWithinLimit) {
  FakeService svc;
  auto e = sp::make_embedder(remote_spec(svc.url()));
  const auto crops = random_crops(150, 6);
  const auto v = sp::embed_batch(crops, *e, 64);
  ASSERT_EQ(v.size(), crops.size());
  for (std::size_t i = 0; i < crops.size(); ++i) {
    const auto expect = sp::reference_embed(crops[i]);
    ASSERT_NEAR(sp::cosine_sim(v[i], expect), 1.0, 1e-6) << i;
  }
  EXPECT_EQ(svc.batch_sizes, (std::vector<std::size_t>{64, 64, 22}));
}

TEST(RemoteEmbedder, DuplicatesGiveIdenticalVectors) {
  FakeService svc;
  auto e = sp::make_embedder(remote_spec(svc.url()));
  const auto crop = random_crops(1, 7).front();
  const std::vector<sp::ImageBuf> twice{crop, crop};
  const auto v = sp::embed_batch(twice, *e, 64);
  EXPECT_EQ(v[0], v[1]);
}

TEST(RemoteEmbedder, ServerErrorsAreRetried) {
  FakeService svc;
  svc.fail_first_with_500 = 2;
  sp::RemoteEmbedder e(remote_spec(svc.url()), 3);
  EXPECT_EQ(e.embed_chunk(random_crops(3, 8)).size(), 3u);
  EXPECT_EQ(svc.calls.load(), 3);
}

TEST(RemoteEmbedder, ClientErrorNamesChunkAndIsNotRetried) {
  FakeService svc;
  svc.reject_call = 2;
  auto e = sp::make_embedder(remote_spec(svc.url()));
  try {
    sp::embed_batch(random_crops(100, 9), *e, 40);
    FAIL() << "expected an error";
  } catch (const sp::EmbeddingError& err) {
    const std::string msg = err.what();
    EXPECT_NE(msg.find("chunk 2/3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("HTTP 400"), std::string::npos) << msg;
  }
  EXPECT_EQ(svc.calls.load(), 2);
}

TEST(RemoteEmbedder, HealthDimensionIsChecked) {
  FakeService svc(768);
  auto spec = remote_spec(svc.url());
  spec.dimension = 24;
  sp::RemoteEmbedder e(spec, 1);
  EXPECT_THROW(e.check_health(), sp::EmbeddingError);

  FakeService ok;
  sp::RemoteEmbedder e2(remote_spec(ok.url()), 1);
  EXPECT_EQ(e2.check_health(), 24);
}

TEST(RemoteEmbedder, UnreachableServiceFails) {
  sp::RemoteEmbedder e(remote_spec("http://127.0.0.1:1"), 1);
  EXPECT_THROW(e.embed_chunk(random_crops(1, 10)), sp::EmbeddingError);
}
