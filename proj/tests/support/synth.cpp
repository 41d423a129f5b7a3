#include "support/synth.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;

namespace synth {

avc::MonoClip tone(double freq_hz, double amplitude, double seconds,
                   int sample_rate, double phase) {
  avc::MonoClip clip;
  clip.sample_rate = sample_rate;
  const auto n = static_cast<size_t>(std::llround(seconds * sample_rate));
  clip.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    clip.samples[i] = amplitude * std::sin(2.0 * M_PI * freq_hz *
                                               static_cast<double>(i) /
                                               sample_rate +
                                           phase);
  }
  return clip;
}

avc::MonoClip harmonic_stack(double f0, int n_harmonics, double amplitude,
                             double seconds, int sample_rate, avc::Rng& rng) {
  avc::MonoClip clip;
  clip.sample_rate = sample_rate;
  const auto n = static_cast<size_t>(std::llround(seconds * sample_rate));
  clip.samples.assign(n, 0.0);
  for (int k = 1; k <= n_harmonics; ++k) {
    const double phase = rng.uniform(0.0, 2.0 * M_PI);
    const double amp = amplitude / k;
    const double w = 2.0 * M_PI * f0 * k / sample_rate;
    for (size_t i = 0; i < n; ++i) {
      clip.samples[i] += amp * std::sin(w * static_cast<double>(i) + phase);
    }
  }
  // mild noise floor so clips are not perfectly periodic
  for (size_t i = 0; i < n; ++i) {
    clip.samples[i] += 0.01 * amplitude * rng.normal();
    clip.samples[i] = std::clamp(clip.samples[i], -1.0, 1.0);
  }
  return clip;
}

avc::MonoClip filtered_noise(double amplitude, double seconds, int sample_rate,
                             avc::Rng& rng) {
  avc::MonoClip clip;
  clip.sample_rate = sample_rate;
  const auto n = static_cast<size_t>(std::llround(seconds * sample_rate));
  std::vector<double> white(n);
  for (double& v : white) v = rng.normal();
  // 16-tap moving average keeps mostly low-frequency content
  clip.samples.assign(n, 0.0);
  constexpr size_t kTaps = 16;
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    acc += white[i];
    if (i >= kTaps) acc -= white[i - kTaps];
    clip.samples[i] =
        std::clamp(amplitude * acc / static_cast<double>(kTaps), -1.0, 1.0);
  }
  return clip;
}

avc::MonoClip constant_clip(double value, double seconds, int sample_rate) {
  avc::MonoClip clip;
  clip.sample_rate = sample_rate;
  clip.samples.assign(static_cast<size_t>(std::llround(seconds * sample_rate)),
                      value);
  return clip;
}

std::string write_corpus(const std::string& dir, const CorpusOptions& options) {
  fs::create_directories(dir);
  std::ofstream manifest(fs::path(dir) / "manifest.csv", std::ios::trunc);
  manifest << "path,label,speed_kmh,mic,road\n";

  avc::Rng rng(options.seed);
  const int speeds[3] = {30, 50, 70};

  struct ClassSpec {
    const char* label;
    double f0_lo, f0_hi;
    int harmonics;
  };
  const ClassSpec vehicle_classes[3] = {
      {"car", 100.0, 130.0, 6},
      {"truck", 45.0, 65.0, 8},
      {"motorcycle", 220.0, 280.0, 5},
  };

  char name[64];
  for (const auto& spec : vehicle_classes) {
    for (size_t i = 0; i < options.per_class; ++i) {
      const double f0 = rng.uniform(spec.f0_lo, spec.f0_hi);
      double amp = rng.uniform(0.2, 0.5);
      const bool quiet = std::string(spec.label) == "truck" &&
                         rng.uniform() < options.quiet_truck_fraction;
      if (quiet) amp *= 0.02;
      const avc::MonoClip clip = harmonic_stack(
          f0, spec.harmonics, amp, options.seconds, options.sample_rate, rng);
      std::snprintf(name, sizeof name, "%s_%04zu.wav", spec.label, i);
      avc::write_wav_file((fs::path(dir) / name).string(), clip,
                          avc::WavEncoding::pcm_s16le);
      manifest << name << ',' << spec.label << ',' << speeds[i % 3]
               << ",SE,dry\n";
    }
  }
  for (size_t i = 0; i < options.per_class; ++i) {
    const avc::MonoClip clip = filtered_noise(
        rng.uniform(0.05, 0.15), options.seconds, options.sample_rate, rng);
    std::snprintf(name, sizeof name, "none_%04zu.wav", i);
    avc::write_wav_file((fs::path(dir) / name).string(), clip,
                        avc::WavEncoding::pcm_s16le);
    manifest << name << ",none," << speeds[i % 3] << ",SE,dry\n";
  }
  return (fs::path(dir) / "manifest.csv").string();
}

std::string make_temp_dir(const std::string& prefix) {
  static std::atomic<uint64_t> counter{0};
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  const fs::path dir = fs::temp_directory_path() /
                       (prefix + "_" + std::to_string(stamp) + "_" +
                        std::to_string(counter.fetch_add(1)));
  fs::create_directories(dir);
  return dir.string();
}

}  // namespace synth
