#include <benchmark/benchmark.h>

#include "avc/audio.hpp"
#include "avc/features.hpp"
#include "avc/rng.hpp"

namespace {

avc::MonoClip two_second_clip() {
  avc::Rng rng(1);
  avc::MonoClip clip;
  clip.sample_rate = 22050;
  clip.samples.reserve(44100);
  for (int i = 0; i < 44100; ++i) clip.samples.push_back(rng.uniform(-0.5, 0.5));
  return clip;
}

void BM_stft(benchmark::State& state) {
  const avc::MonoClip clip = two_second_clip();
  for (auto _ : state) {
    benchmark::DoNotOptimize(avc::stft(clip));
  }
}
BENCHMARK(BM_stft);

void BM_mel_spectrogram(benchmark::State& state) {
  const avc::MonoClip clip = two_second_clip();
  for (auto _ : state) {
    benchmark::DoNotOptimize(avc::mel_spectrogram(clip));
  }
}
BENCHMARK(BM_mel_spectrogram);

void BM_mfcc(benchmark::State& state) {
  const avc::MonoClip clip = two_second_clip();
  for (auto _ : state) {
    benchmark::DoNotOptimize(avc::mfcc(clip));
  }
}
BENCHMARK(BM_mfcc);

void BM_gfcc(benchmark::State& state) {
  const avc::MonoClip clip = two_second_clip();
  for (auto _ : state) {
    benchmark::DoNotOptimize(avc::gfcc(clip));
  }
}
BENCHMARK(BM_gfcc);

void BM_resample_48k_to_22k(benchmark::State& state) {
  avc::Rng rng(2);
  avc::MonoClip clip;
  clip.sample_rate = 48000;
  for (int i = 0; i < 96000; ++i) clip.samples.push_back(rng.uniform(-0.5, 0.5));
  for (auto _ : state) {
    benchmark::DoNotOptimize(avc::resample(clip, 22050));
  }
}
BENCHMARK(BM_resample_48k_to_22k);

}  // namespace
