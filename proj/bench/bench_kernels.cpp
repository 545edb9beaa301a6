// Serial vs OpenMP kernels on square frames. Pass --benchmark_filter to pick one.

#include <random>

#include <benchmark/benchmark.h>

#include "spillprobe/detect.hpp"
#include "spillprobe/kernels.hpp"

namespace sp = spillprobe;
namespace k = spillprobe::kernels;

namespace {

sp::ImageBuf noise(int side, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  sp::ImageBuf img(side, side);
  for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng() & 0xFF);
  return img;
}

void set_pixels(benchmark::State& state) {
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

template <bool Parallel>
void BM_Gray(benchmark::State& state) {
  const auto img = noise(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(Parallel ? k::to_gray(img) : k::serial::to_gray(img));
  set_pixels(state);
}

template <bool Parallel>
void BM_Blur(benchmark::State& state) {
  const auto g = k::to_gray(noise(static_cast<int>(state.range(0)), 2));
  for (auto _ : state) benchmark::DoNotOptimize(Parallel ? k::gaussian_blur(g, 2.0) : k::serial::gaussian_blur(g, 2.0));
  set_pixels(state);
}

template <bool Parallel>
void BM_Threshold(benchmark::State& state) {
  const auto a = k::to_gray(noise(static_cast<int>(state.range(0)), 3));
  const auto b = k::to_gray(noise(static_cast<int>(state.range(0)), 4));
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? k::diff_threshold(a, b, 15.0) : k::serial::diff_threshold(a, b, 15.0));
  }
  set_pixels(state);
}

template <bool Parallel>
void BM_Ssim(benchmark::State& state) {
  const auto a = k::to_gray(noise(static_cast<int>(state.range(0)), 5));
  const auto b = k::to_gray(noise(static_cast<int>(state.range(0)), 6));
  for (auto _ : state) benchmark::DoNotOptimize(Parallel ? k::ssim_map(a, b) : k::serial::ssim_map(a, b));
  set_pixels(state);
}

void BM_Components(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  std::mt19937_64 rng(7);
  sp::BinaryMap m(side, side);
  for (auto& v : m.data) v = (rng() % 100) < 30 ? 1 : 0;
  for (auto _ : state) benchmark::DoNotOptimize(sp::connected_components(m, 1));
  set_pixels(state);
}

}  // namespace

BENCHMARK(BM_Gray<false>)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Gray<true>)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Blur<false>)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Blur<true>)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Threshold<false>)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Threshold<true>)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ssim<false>)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ssim<true>)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Components)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
