#include <benchmark/benchmark.h>

#include "avc/quality.hpp"
#include "avc/rng.hpp"

namespace {

void BM_frame_rmse(benchmark::State& state) {
  avc::Rng rng(1);
  avc::MonoClip clip;
  clip.sample_rate = 22050;
  for (int i = 0; i < 44100; ++i) clip.samples.push_back(rng.uniform(-0.5, 0.5));
  for (auto _ : state) {
    benchmark::DoNotOptimize(avc::frame_rmse(clip));
  }
}
BENCHMARK(BM_frame_rmse);

void BM_kmeans_500x87(benchmark::State& state) {
  avc::Rng rng(2);
  std::vector<std::vector<double>> vectors;
  for (int i = 0; i < 500; ++i) {
    std::vector<double> v(87);
    const double base = i % 2 ? 0.4 : 0.02;
    for (double& x : v) x = base + 0.01 * rng.uniform();
    vectors.push_back(std::move(v));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(avc::kmeans(vectors));
  }
}
BENCHMARK(BM_kmeans_500x87)->Unit(benchmark::kMillisecond);

}  // namespace
