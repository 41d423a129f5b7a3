#include <benchmark/benchmark.h>

#include "avc/nn.hpp"
#include "avc/rng.hpp"

namespace {

using namespace avc::nn;

Tensor random_input(avc::Rng& rng) {
  Tensor t = Tensor::zeros({128, 87});
  for (double& v : t.data) v = rng.uniform(-40.0, 0.0);
  return t;
}

void BM_model_forward(benchmark::State& state) {
  Model model = build_model(128, 87);
  avc::Rng rng(1);
  const Tensor x = random_input(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.forward(x, false, rng));
  }
}
BENCHMARK(BM_model_forward);

void BM_model_forward_backward(benchmark::State& state) {
  Model model = build_model(128, 87);
  avc::Rng rng(1);
  const Tensor x = random_input(rng);
  for (auto _ : state) {
    const Tensor probs = model.forward(x, true, rng);
    Tensor dlogits = probs;
    dlogits.data[0] -= 1.0;
    model.zero_grads();
    benchmark::DoNotOptimize(model.backward(dlogits, model.layers.size() - 2));
  }
}
BENCHMARK(BM_model_forward_backward);

void BM_train_epoch_64_clips(benchmark::State& state) {
  avc::Rng rng(2);
  std::vector<TrainExample> data;
  for (int i = 0; i < 64; ++i) {
    data.push_back({random_input(rng), i % 4});
  }
  for (auto _ : state) {
    Model model = build_model(128, 87);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.validation_fraction = 0.0;
    benchmark::DoNotOptimize(train(model, data, cfg));
  }
}
BENCHMARK(BM_train_epoch_64_clips)->Unit(benchmark::kMillisecond);

}  // namespace
