#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "avc/audio.hpp"

namespace avc {

struct StftParams {
  int n_fft = 2048;
  int win_length = 1024;
  int hop = 512;
};

struct StftGrid {
  size_t n_frames = 0;
  size_t n_bins = 0;  // n_fft / 2 + 1
  std::vector<std::complex<double>> values;  // frame-major
  StftParams params;
  int sample_rate = 0;

  std::complex<double>& at(size_t frame, size_t bin) {
    return values[frame * n_bins + bin];
  }
  const std::complex<double>& at(size_t frame, size_t bin) const {
    return values[frame * n_bins + bin];
  }
};

enum class FilterKind { mel, gammatone };

struct FilterBank {
  size_t n_filters = 0;
  size_t n_bins = 0;
  std::vector<double> weights;  // filter-major
  FilterKind kind = FilterKind::mel;
  std::vector<double> center_freqs;  // Hz, strictly increasing
  // Per-filter half-open bin range with nonzero weights (dense rows use
  // the full range); lets the mel projection skip the zero skirt.
  std::vector<std::pair<size_t, size_t>> support;

  double at(size_t filter, size_t bin) const {
    return weights[filter * n_bins + bin];
  }
};

// Parameters of one gammatone impulse response
//   g(t) = a * t^(n-1) * exp(-2 pi b t) * cos(2 pi f_c t + phi)
struct GammatoneParams {
  double amplitude = 1.0;   // a
  int order = 4;            // n
  double bandwidth_hz = 0;  // b
  double center_hz = 0;     // f_c
  double phase = 0.0;       // phi, radians
};

enum class FeatureKind { mel, mfcc, gfcc };

const char* to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& name);

struct FeatureMatrix {
  size_t n_frames = 0;
  size_t n_coeffs = 0;
  std::vector<double> values;  // frame-major
  FeatureKind kind = FeatureKind::mel;
  int frame_hop = 512;
  int sample_rate = 0;

  double& at(size_t frame, size_t coeff) {
    return values[frame * n_coeffs + coeff];
  }
  double at(size_t frame, size_t coeff) const {
    return values[frame * n_coeffs + coeff];
  }
};

// Periodic Hann: w[i] = 0.5 - 0.5 cos(2 pi i / n).
std::vector<double> hann_window(size_t n);

// Reflection-padded, centered STFT. Frame count is 1 + floor(len / hop).
StftGrid stft(const MonoClip& clip, const StftParams& params = {});

// One-sided |DFT| of the whole clip; bin k is k * sample_rate / n Hz.
std::vector<double> magnitude_spectrum(const MonoClip& clip);

// Triangular filters with centers equally spaced on the Slaney mel scale,
// area-normalized by 2 / (f_upper - f_lower). f_max < 0 means sample_rate/2.
FilterBank mel_filterbank(int sample_rate = 22050, int n_fft = 2048,
                          int n_mels = 128, double f_min = 0.0,
                          double f_max = -1.0);

// |STFT|^2 through the mel filterbank, in dB relative to the matrix maximum,
// floored at max - 80 dB.
FeatureMatrix mel_spectrogram(const MonoClip& clip, int n_mels = 128,
                              const StftParams& params = {});

// Orthonormal DCT-II, first n_out coefficients.
std::vector<double> dct_ii(std::span<const double> v, size_t n_out);

// DCT-II of the dB mel-spectrogram, per frame.
FeatureMatrix mfcc(const MonoClip& clip, int n_mfcc = 128, int n_mels = 128,
                   const StftParams& params = {});

// Glasberg-Moore ERB: 24.7 * (1 + 4.37 f / 1000).
double erb_bandwidth(double center_hz);

double gammatone_ir(const GammatoneParams& params, double t_seconds);

// Center frequencies equally spaced on the ERB-rate scale; per-filter response
// is the peak-normalized |DFT| of the sampled impulse response (a=1, n=4,
// b = 1.019 ERB(f_c), phi=0, truncated at 50 ms).
FilterBank gammatone_filterbank(int sample_rate = 22050, int n_fft = 2048,
                                int n_filters = 128, double f_min = 20.0,
                                double f_max = -1.0);

// |STFT|^2 through the gammatone filterbank, log(energy + 1e-10), DCT-II per
// frame keeping n_ceps coefficients.
FeatureMatrix gfcc(const MonoClip& clip, int n_ceps = 64, int n_filters = 128,
                   const StftParams& params = {});

// Inspect support: one frame per row, and an 8-bit min-max scaled PGM with
// coefficient 0 on the bottom row.
void write_feature_csv(std::ostream& out, const FeatureMatrix& fm);
FeatureMatrix read_feature_csv(std::istream& in, FeatureKind kind);
void write_feature_pgm(std::ostream& out, const FeatureMatrix& fm);

}  // namespace avc
