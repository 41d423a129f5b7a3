#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <sstream>

#include "avc/errors.hpp"
#include "avc/features.hpp"
#include "avc/rng.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"

using namespace avc;

namespace {

MonoClip random_clip(size_t n, uint64_t seed, int rate = 22050) {
  Rng rng(seed);
  MonoClip clip;
  clip.sample_rate = rate;
  clip.samples.reserve(n);
  for (size_t i = 0; i < n; ++i) clip.samples.push_back(rng.uniform(-0.8, 0.8));
  return clip;
}

}  // namespace

TEST_CASE("hann_window closed forms") {
  const auto w4 = hann_window(4);
  CHECK(w4[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(w4[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(w4[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(w4[3] == doctest::Approx(0.5).epsilon(1e-12));

  for (const size_t n : {2, 5, 16, 1024}) {
    const auto w = hann_window(n);
    CHECK(w[0] == doctest::Approx(0.0).epsilon(1e-12));
    if (n % 2 == 0) CHECK(w[n / 2] == doctest::Approx(1.0).epsilon(1e-12));
    for (const double v : w) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("stft frame count and shape") {
  const MonoClip clip = random_clip(44100, 1);
  const StftGrid grid = stft(clip);
  CHECK(grid.n_frames == 87);
  CHECK(grid.n_bins == 1025);
}

TEST_CASE("stft frame count law for arbitrary lengths") {
  for (const size_t n : {1, 511, 512, 513, 10000, 44100}) {
    const MonoClip clip = random_clip(n, n);
    CHECK(stft(clip).n_frames == 1 + n / 512);
  }
}

TEST_CASE("stft of impulse at a frame center is flat at the window peak") {
  MonoClip clip;
  clip.sample_rate = 22050;
  clip.samples.assign(4096, 0.0);
  clip.samples[2 * 512] = 1.0;  // center of frame 2
  const StftGrid grid = stft(clip);
  for (size_t b = 0; b < grid.n_bins; ++b) {
    CHECK(std::abs(grid.at(2, b)) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("stft matches the O(N^2) direct DFT oracle") {
  for (uint64_t seed = 0; seed < 3; ++seed) {
    const MonoClip clip = random_clip(1024, 100 + seed);
    const StftGrid grid = stft(clip);
    for (size_t t = 0; t < grid.n_frames; ++t) {
      const auto frame =
          oracle::framed_window(clip.samples, t, 2048, 1024, 512);
      const auto expect = oracle::direct_dft(frame);
      for (size_t b = 0; b < grid.n_bins; ++b) {
        CHECK(std::abs(grid.at(t, b) - expect[b]) < 1e-9);
      }
    }
  }
}

TEST_CASE("stft is linear") {
  const MonoClip x = random_clip(4096, 21);
  const MonoClip y = random_clip(4096, 22);
  MonoClip sum = x;
  for (size_t i = 0; i < sum.samples.size(); ++i) sum.samples[i] += y.samples[i];
  const StftGrid gx = stft(x), gy = stft(y), gs = stft(sum);
  for (size_t i = 0; i < gs.values.size(); ++i) {
    CHECK(std::abs(gs.values[i] - (gx.values[i] + gy.values[i])) < 1e-9);
  }
}

TEST_CASE("stft time-shift covariance by one hop") {
  const MonoClip x = random_clip(8192, 33);
  MonoClip shifted;
  shifted.sample_rate = x.sample_rate;
  shifted.samples.assign(512, 0.0);
  shifted.samples.insert(shifted.samples.end(), x.samples.begin(),
                         x.samples.end() - 512);
  const StftGrid gx = stft(x), gs = stft(shifted);
  // interior frames only: away from the reflection-padded boundary
  for (size_t t = 3; t + 3 < gx.n_frames; ++t) {
    for (size_t b = 0; b < gx.n_bins; ++b) {
      CHECK(std::abs(std::abs(gs.at(t + 1, b)) - std::abs(gx.at(t, b))) < 1e-6);
    }
  }
}

TEST_CASE("magnitude_spectrum of a bin-aligned sine peaks at A*N/2") {
  const size_t n = 4096;
  const double amp = 0.37;
  const double freq = 32.0 * 22050.0 / n;  // exact bin 32
  const MonoClip clip = synth::tone(freq, amp, n / 22050.0, 22050);
  REQUIRE(clip.samples.size() == n);
  const auto mag = magnitude_spectrum(clip);
  CHECK(mag[32] == doctest::Approx(amp * n / 2.0).epsilon(1e-6));
  CHECK(mag[100] < 1e-6);
}

TEST_CASE("magnitude_spectrum of silence is zero") {
  MonoClip clip;
  clip.sample_rate = 22050;
  clip.samples.assign(1000, 0.0);
  for (const double v : magnitude_spectrum(clip)) CHECK(v == 0.0);
}

TEST_CASE("magnitude_spectrum satisfies Parseval") {
  const MonoClip clip = random_clip(2048, 44);
  const auto mag = magnitude_spectrum(clip);
  double time_energy = 0.0;
  for (const double v : clip.samples) time_energy += v * v;
  double freq_energy = mag[0] * mag[0] + mag.back() * mag.back();
  for (size_t k = 1; k + 1 < mag.size(); ++k) freq_energy += 2.0 * mag[k] * mag[k];
  freq_energy /= static_cast<double>(clip.samples.size());
  CHECK(freq_energy ==
        doctest::Approx(time_energy).epsilon(1e-6));
}

TEST_CASE("mel_filterbank rows are unimodal with increasing centers") {
  const FilterBank fb = mel_filterbank();
  CHECK(fb.n_filters == 128);
  CHECK(fb.n_bins == 1025);
  for (size_t f = 0; f < fb.n_filters; ++f) {
    bool rising = true;
    int direction_changes = 0;
    for (size_t b = 1; b < fb.n_bins; ++b) {
      const double prev = fb.at(f, b - 1), cur = fb.at(f, b);
      CHECK(cur >= 0.0);
      if (rising && cur < prev) {
        rising = false;
        ++direction_changes;
      } else if (!rising && cur > prev) {
        ++direction_changes;
      }
    }
    CHECK(direction_changes <= 1);
    if (f > 0) CHECK(fb.center_freqs[f] > fb.center_freqs[f - 1]);
  }
}

TEST_CASE("mel_filterbank matches direct triangle evaluation") {
  const FilterBank fb = mel_filterbank();
  const std::pair<size_t, size_t> probes[5] = {
      {0, 2}, {17, 40}, {64, 300}, {100, 700}, {127, 1020}};
  for (const auto& [f, b] : probes) {
    const double expect =
        oracle::direct_mel_weight(22050, 2048, 128, 0.0, 11025.0, f, b);
    CHECK(fb.at(f, b) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("mel_filterbank leaves unresolvable filters all-zero") {
  // 96 mels over a 33-bin grid: many triangles are narrower than a bin
  const FilterBank fb = mel_filterbank(22050, 64, 96);
  size_t empty = 0;
  for (size_t f = 0; f < fb.n_filters; ++f) {
    const auto [begin, end] = fb.support[f];
    if (begin == end) {
      ++empty;
      for (size_t b = 0; b < fb.n_bins; ++b) CHECK(fb.at(f, b) == 0.0);
    }
  }
  CHECK(empty > 0);
}

TEST_CASE("mel_spectrogram of silence is a uniform floor at 0 dB max") {
  MonoClip clip;
  clip.sample_rate = 22050;
  clip.samples.assign(44100, 0.0);
  const FeatureMatrix fm = mel_spectrogram(clip);
  CHECK(fm.n_frames == 87);
  CHECK(fm.n_coeffs == 128);
  for (const double v : fm.values) CHECK(v == doctest::Approx(fm.values[0]));
}

TEST_CASE("mel_spectrogram maximum is 0 dB by construction") {
  const MonoClip clip = random_clip(44100, 55);
  const FeatureMatrix fm = mel_spectrogram(clip);
  double mx = -1e18;
  for (const double v : fm.values) mx = std::max(mx, v);
  CHECK(mx == doctest::Approx(0.0).epsilon(1e-12));
  for (const double v : fm.values) CHECK(v >= -80.0 - 1e-12);
}

TEST_CASE("mel_spectrogram matches the composed direct oracle") {
  const MonoClip clip = random_clip(4096, 66);
  const FeatureMatrix fm = mel_spectrogram(clip);
  const auto expect = oracle::direct_mel_spectrogram(clip.samples, 22050, 128);
  REQUIRE(fm.values.size() == expect.size());
  for (size_t i = 0; i < expect.size(); ++i) {
    CHECK(fm.values[i] == doctest::Approx(expect[i]).epsilon(1e-6));
  }
}

TEST_CASE("dct_ii closed forms and oracle") {
  // constant input: y[0] = c * sqrt(N), higher coefficients 0
  const std::vector<double> constant(16, 0.75);
  const auto y = dct_ii(constant, 16);
  CHECK(y[0] == doctest::Approx(0.75 * std::sqrt(16.0)).epsilon(1e-12));
  for (size_t k = 1; k < y.size(); ++k) CHECK(std::abs(y[k]) < 1e-12);

  // orthonormality preserves energy
  Rng rng(7);
  std::vector<double> v(32);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  const auto full = dct_ii(v, v.size());
  double in_e = 0.0, out_e = 0.0;
  for (const double x : v) in_e += x * x;
  for (const double x : full) out_e += x * x;
  CHECK(out_e == doctest::Approx(in_e).epsilon(1e-9));

  // direct double-sum oracle on a length-8 vector
  std::vector<double> v8(8);
  for (double& x : v8) x = rng.uniform(-1.0, 1.0);
  const auto got = dct_ii(v8, 8);
  const auto expect = oracle::direct_dct_ii(v8, 8);
  for (size_t k = 0; k < 8; ++k) {
    CHECK(std::abs(got[k] - expect[k]) < 1e-12);
  }
}

TEST_CASE("dct_ii then inverse DCT is the identity") {
  Rng rng(8);
  std::vector<double> v(24);
  for (double& x : v) x = rng.uniform(-2.0, 2.0);
  const auto y = dct_ii(v, v.size());
  const auto back = oracle::direct_dct_iii(y);
  for (size_t i = 0; i < v.size(); ++i) {
    CHECK(back[i] == doctest::Approx(v[i]).epsilon(1e-9));
  }
}

TEST_CASE("mfcc shape and silence closed form") {
  MonoClip clip;
  clip.sample_rate = 22050;
  clip.samples.assign(44100, 0.0);
  const FeatureMatrix fm = mfcc(clip);
  CHECK(fm.n_frames == 87);
  CHECK(fm.n_coeffs == 128);
  // silence: every frame of the dB mel-spectrogram is constant, so
  // coefficient 0 is value * sqrt(128) and the rest vanish
  const FeatureMatrix mel = mel_spectrogram(clip);
  const double expect0 = mel.values[0] * std::sqrt(128.0);
  for (size_t t = 0; t < fm.n_frames; ++t) {
    CHECK(fm.at(t, 0) == doctest::Approx(expect0).epsilon(1e-9));
    for (size_t c = 1; c < fm.n_coeffs; ++c) {
      CHECK(std::abs(fm.at(t, c)) < 1e-9);
    }
  }
}

TEST_CASE("mfcc matches the composed direct oracle") {
  const MonoClip clip = random_clip(4096, 77);
  const FeatureMatrix fm = mfcc(clip);
  const auto expect = oracle::direct_mfcc(clip.samples, 22050, 128, 128);
  REQUIRE(fm.values.size() == expect.size());
  for (size_t i = 0; i < expect.size(); ++i) {
    CHECK(fm.values[i] == doctest::Approx(expect[i]).epsilon(1e-6));
  }
}

TEST_CASE("erb_bandwidth closed forms") {
  CHECK(erb_bandwidth(1000.0) == doctest::Approx(132.639).epsilon(1e-9));
  CHECK(erb_bandwidth(1e-9) == doctest::Approx(24.7).epsilon(1e-6));
  double prev = 0.0;
  for (double f = 50.0; f < 11025.0; f += 500.0) {
    const double b = erb_bandwidth(f);
    CHECK(b > prev);
    prev = b;
  }
}

TEST_CASE("gammatone_ir vanishes at t=0 for order > 1 and scales with a") {
  GammatoneParams p;
  p.bandwidth_hz = 1.019 * erb_bandwidth(1000.0);
  p.center_hz = 1000.0;
  CHECK(gammatone_ir(p, 0.0) == 0.0);

  GammatoneParams p2 = p;
  p2.amplitude = 2.0;
  for (double t = 1e-4; t < 0.01; t += 1e-4) {
    CHECK(gammatone_ir(p2, t) == doctest::Approx(2.0 * gammatone_ir(p, t)));
  }
}

TEST_CASE("gammatone envelope peaks at (n-1)/(2 pi b)") {
  GammatoneParams p;
  p.center_hz = 1000.0;
  p.bandwidth_hz = 1.019 * erb_bandwidth(p.center_hz);
  const double t_star = 3.0 / (2.0 * M_PI * p.bandwidth_hz);
  p.phase = -2.0 * M_PI * p.center_hz * t_star;  // cos == 1 at the peak

  double best_t = 0.0, best = -1.0;
  for (double t = 0.0; t <= 3.0 * t_star; t += 1e-6) {
    const double g = std::abs(gammatone_ir(p, t));
    if (g > best) {
      best = g;
      best_t = t;
    }
  }
  CHECK(std::abs(best_t - t_star) <= 1e-6);
}

TEST_CASE("gammatone_filterbank responses peak near their centers") {
  const FilterBank fb = gammatone_filterbank();
  CHECK(fb.n_filters == 128);
  const double bin_hz = 22050.0 / 2048.0;
  for (size_t f = 0; f < fb.n_filters; ++f) {
    size_t peak = 0;
    for (size_t b = 1; b < fb.n_bins; ++b) {
      if (fb.at(f, b) > fb.at(f, peak)) peak = b;
    }
    const double peak_hz = static_cast<double>(peak) * bin_hz;
    const double fc = fb.center_freqs[f];
    const double bw = 1.019 * erb_bandwidth(fc);
    if (fc + 1.5 * bw < 11025.0) {
      CHECK(std::abs(peak_hz - fc) <= 2.0 * bin_hz);
    } else {
      // within ~1.5 bandwidths of Nyquist the mirrored alias lobe of the
      // sampled impulse response shifts the peak by a bandwidth fraction
      CHECK(std::abs(peak_hz - fc) <= std::max(2.0 * bin_hz, 0.15 * bw));
    }
    if (f > 0) CHECK(fb.center_freqs[f] > fb.center_freqs[f - 1]);
  }
  for (const double w : fb.weights) {
    CHECK(w >= 0.0);
    CHECK(w <= 1.0 + 1e-12);
  }
}

TEST_CASE("gfcc shape and silence closed form") {
  MonoClip clip;
  clip.sample_rate = 22050;
  clip.samples.assign(44100, 0.0);
  const FeatureMatrix fm = gfcc(clip);
  CHECK(fm.n_frames == 87);
  CHECK(fm.n_coeffs == 64);
  const double expect0 = std::log(1e-10) * std::sqrt(128.0);
  for (size_t t = 0; t < fm.n_frames; ++t) {
    CHECK(fm.at(t, 0) == doctest::Approx(expect0).epsilon(1e-9));
    for (size_t c = 1; c < fm.n_coeffs; ++c) {
      CHECK(std::abs(fm.at(t, c)) < 1e-9);
    }
  }
}

TEST_CASE("gfcc matches the composed direct oracle") {
  const MonoClip clip = random_clip(2048, 88);
  const FeatureMatrix fm = gfcc(clip);
  const auto expect = oracle::direct_gfcc(clip.samples, 22050, 64, 128);
  REQUIRE(fm.values.size() == expect.size());
  for (size_t i = 0; i < expect.size(); ++i) {
    CHECK(fm.values[i] == doctest::Approx(expect[i]).epsilon(1e-6));
  }
}

TEST_CASE("feature extractors are bit-deterministic") {
  const MonoClip clip = random_clip(44100, 99);
  CHECK(mel_spectrogram(clip).values == mel_spectrogram(clip).values);
  CHECK(mfcc(clip).values == mfcc(clip).values);
  CHECK(gfcc(clip).values == gfcc(clip).values);
}

TEST_CASE("all FeatureMatrix kinds obey the frame-count law") {
  for (const size_t n : {1000, 22050, 44100}) {
    const MonoClip clip = random_clip(n, n + 1);
    const size_t expect = 1 + n / 512;
    CHECK(mel_spectrogram(clip).n_frames == expect);
    CHECK(mfcc(clip).n_frames == expect);
    CHECK(gfcc(clip).n_frames == expect);
  }
}

TEST_CASE("feature CSV and PGM writers") {
  const MonoClip clip = random_clip(44100, 12);
  const FeatureMatrix fm = mel_spectrogram(clip);

  std::ostringstream csv;
  write_feature_csv(csv, fm);
  std::istringstream back(csv.str());
  const FeatureMatrix round = read_feature_csv(back, FeatureKind::mel);
  REQUIRE(round.n_frames == fm.n_frames);
  REQUIRE(round.n_coeffs == fm.n_coeffs);
  for (size_t i = 0; i < fm.values.size(); ++i) {
    CHECK(round.values[i] == doctest::Approx(fm.values[i]).epsilon(1e-6));
  }

  std::ostringstream pgm;
  write_feature_pgm(pgm, fm);
  const std::string s = pgm.str();
  CHECK(s.substr(0, 3) == "P5\n");
  CHECK(s.find("87 128") != std::string::npos);
  CHECK(s.size() > 87 * 128);  // header + payload
}

TEST_CASE("invalid parameters are rejected") {
  const MonoClip clip = random_clip(2048, 1);
  StftParams bad;
  bad.hop = 0;
  CHECK_THROWS_AS(stft(clip, bad), InvalidArgument);
  bad = {};
  bad.win_length = 4096;
  CHECK_THROWS_AS(stft(clip, bad), InvalidArgument);
  CHECK_THROWS_AS(mfcc(clip, 256, 128), InvalidArgument);
  CHECK_THROWS_AS(gfcc(clip, 256, 128), InvalidArgument);
  MonoClip empty;
  empty.sample_rate = 22050;
  CHECK_THROWS_AS(stft(empty), InvalidArgument);
  CHECK_THROWS_AS(magnitude_spectrum(empty), InvalidArgument);
}
