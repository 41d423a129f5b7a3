#include "avc/features.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <ostream>
#include <sstream>

#include "avc/csv.hpp"
#include "avc/errors.hpp"
#include "avc/fft.hpp"

namespace avc {

namespace {

constexpr double kDbFloor = 80.0;    // dynamic range below the matrix maximum
constexpr double kPowerAmin = 1e-10;
constexpr double kGfccEps = 1e-10;
constexpr double kGammatoneIrSeconds = 0.05;

// Reflection without repeating the edge sample ([a b c d] -> c b | a b c d | c b).
double reflect_at(const std::vector<double>& x, int64_t i) {
  const int64_t n = static_cast<int64_t>(x.size());
  if (n == 1) return x[0];
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return x[static_cast<size_t>(i)];
}

// Slaney mel scale: linear below 1 kHz, logarithmic above.
double hz_to_mel(double hz) {
  constexpr double f_sp = 200.0 / 3.0;
  constexpr double min_log_hz = 1000.0;
  constexpr double min_log_mel = min_log_hz / f_sp;
  if (hz < min_log_hz) return hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  return min_log_mel + std::log(hz / min_log_hz) / logstep;
}

double mel_to_hz(double mel) {
  constexpr double f_sp = 200.0 / 3.0;
  constexpr double min_log_hz = 1000.0;
  constexpr double min_log_mel = min_log_hz / f_sp;
  if (mel < min_log_mel) return mel * f_sp;
  const double logstep = std::log(6.4) / 27.0;
  return min_log_hz * std::exp(logstep * (mel - min_log_mel));
}

// ERB-rate scale (Glasberg-Moore).
double hz_to_erb_rate(double hz) {
  return 21.4 * std::log10(1.0 + 0.00437 * hz);
}

double erb_rate_to_hz(double erbs) {
  return (std::pow(10.0, erbs / 21.4) - 1.0) / 0.00437;
}

// Power spectrogram |STFT|^2, frame-major, n_bins columns.
std::vector<double> power_spectrogram(const StftGrid& grid) {
  std::vector<double> power(grid.values.size());
  for (size_t i = 0; i < grid.values.size(); ++i) {
    power[i] = std::norm(grid.values[i]);
  }
  return power;
}

// filterbank projection: out[frame][filter] = sum_bin w[filter][bin] * p[frame][bin]
std::vector<double> project(const std::vector<double>& power, size_t n_frames,
                            const FilterBank& fb) {
  std::vector<double> out(n_frames * fb.n_filters, 0.0);
  for (size_t t = 0; t < n_frames; ++t) {
    const double* p = power.data() + t * fb.n_bins;
    double* row = out.data() + t * fb.n_filters;
    for (size_t f = 0; f < fb.n_filters; ++f) {
      const auto [begin, end] = fb.support[f];
      const double* w = fb.weights.data() + f * fb.n_bins;
      double acc = 0.0;
      for (size_t b = begin; b < end; ++b) acc += w[b] * p[b];
      row[f] = acc;
    }
  }
  return out;
}

// In-place conversion to dB relative to the matrix maximum, floored.
void power_to_db(std::vector<double>& m) {
  double ref = kPowerAmin;
  for (const double v : m) ref = std::max(ref, v);
  const double log_ref = 10.0 * std::log10(ref);
  double top = -std::numeric_limits<double>::infinity();
  for (double& v : m) {
    v = 10.0 * std::log10(std::max(v, kPowerAmin)) - log_ref;
    top = std::max(top, v);
  }
  for (double& v : m) v = std::max(v, top - kDbFloor);
}

// Orthonormal DCT-II matrix, n_out x n.
std::vector<double> dct_matrix(size_t n, size_t n_out) {
  std::vector<double> m(n_out * n);
  const double c0 = std::sqrt(1.0 / static_cast<double>(n));
  const double ck = std::sqrt(2.0 / static_cast<double>(n));
  for (size_t k = 0; k < n_out; ++k) {
    const double scale = k == 0 ? c0 : ck;
    for (size_t j = 0; j < n; ++j) {
      m[k * n + j] = scale * std::cos(M_PI * static_cast<double>(k) *
                                      (2.0 * static_cast<double>(j) + 1.0) /
                                      (2.0 * static_cast<double>(n)));
    }
  }
  return m;
}

void validate_stft_params(const StftParams& p) {
  if (p.hop <= 0) throw InvalidArgument("stft: hop must be positive");
  if (p.win_length <= 0) throw InvalidArgument("stft: win_length must be positive");
  if (p.win_length > p.n_fft) {
    throw InvalidArgument("stft: win_length exceeds n_fft");
  }
}

}  // namespace

const char* to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::mel: return "mel";
    case FeatureKind::mfcc: return "mfcc";
    case FeatureKind::gfcc: return "gfcc";
  }
  return "?";
}

FeatureKind feature_kind_from_string(const std::string& name) {
  if (name == "mel") return FeatureKind::mel;
  if (name == "mfcc") return FeatureKind::mfcc;
  if (name == "gfcc") return FeatureKind::gfcc;
  throw InvalidArgument("unknown feature kind: " + name);
}

std::vector<double> hann_window(size_t n) {
  if (n == 0) throw InvalidArgument("hann_window: n must be >= 1");
  std::vector<double> w(n);
  for (size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) /
                                static_cast<double>(n));
  }
  return w;
}

StftGrid stft(const MonoClip& clip, const StftParams& params) {
  validate_stft_params(params);
  if (clip.samples.empty()) throw InvalidArgument("stft: empty clip");

  const size_t n_fft = static_cast<size_t>(params.n_fft);
  const size_t win = static_cast<size_t>(params.win_length);
  const size_t hop = static_cast<size_t>(params.hop);
  const size_t n = clip.samples.size();
  const size_t pad = n_fft / 2;
  const size_t n_frames = 1 + n / hop;

  // window of win_length samples centered in the n_fft frame
  const std::vector<double> w = hann_window(win);
  const size_t w_off = (n_fft - win) / 2;

  StftGrid grid;
  grid.n_frames = n_frames;
  grid.n_bins = n_fft / 2 + 1;
  grid.params = params;
  grid.sample_rate = clip.sample_rate;
  grid.values.resize(n_frames * grid.n_bins);

  std::vector<double> frame(n_fft);
  for (size_t t = 0; t < n_frames; ++t) {
    std::fill(frame.begin(), frame.end(), 0.0);
    const int64_t start = static_cast<int64_t>(t * hop) - static_cast<int64_t>(pad);
    for (size_t i = 0; i < win; ++i) {
      frame[w_off + i] =
          w[i] * reflect_at(clip.samples, start + static_cast<int64_t>(w_off + i));
    }
    const auto spec = fft::rfft(frame, n_fft);
    std::copy(spec.begin(), spec.end(), grid.values.begin() + t * grid.n_bins);
  }
  return grid;
}

std::vector<double> magnitude_spectrum(const MonoClip& clip) {
  if (clip.samples.empty()) {
    throw InvalidArgument("magnitude_spectrum: empty clip");
  }
  const auto spec = fft::rfft(clip.samples, clip.samples.size());
  std::vector<double> mag(spec.size());
  for (size_t i = 0; i < spec.size(); ++i) mag[i] = std::abs(spec[i]);
  return mag;
}

FilterBank mel_filterbank(int sample_rate, int n_fft, int n_mels, double f_min,
                          double f_max) {
  if (n_mels < 1) throw InvalidArgument("mel_filterbank: n_mels must be >= 1");
  if (f_max < 0) f_max = sample_rate / 2.0;
  if (!(f_min < f_max) || f_max > sample_rate / 2.0 + 1e-9) {
    throw InvalidArgument("mel_filterbank: need f_min < f_max <= sample_rate/2");
  }

  const size_t n_bins = static_cast<size_t>(n_fft) / 2 + 1;
  const size_t nf = static_cast<size_t>(n_mels);

  // n_mels + 2 break frequencies equally spaced in mel
  std::vector<double> freqs(nf + 2);
  const double mel_lo = hz_to_mel(f_min);
  const double mel_hi = hz_to_mel(f_max);
  for (size_t i = 0; i < freqs.size(); ++i) {
    const double mel = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                    static_cast<double>(nf + 1);
    freqs[i] = mel_to_hz(mel);
  }

  FilterBank fb;
  fb.n_filters = nf;
  fb.n_bins = n_bins;
  fb.kind = FilterKind::mel;
  fb.weights.assign(nf * n_bins, 0.0);
  fb.center_freqs.assign(freqs.begin() + 1, freqs.end() - 1);
  fb.support.resize(nf);

  const double bin_hz = static_cast<double>(sample_rate) / n_fft;
  for (size_t f = 0; f < nf; ++f) {
    const double lower = freqs[f], center = freqs[f + 1], upper = freqs[f + 2];
    const double enorm = 2.0 / (upper - lower);  // area normalization
    size_t begin = n_bins, end = 0;
    for (size_t b = 0; b < n_bins; ++b) {
      const double hz = bin_hz * static_cast<double>(b);
      const double rising = (hz - lower) / (center - lower);
      const double falling = (upper - hz) / (upper - center);
      const double v = std::max(0.0, std::min(rising, falling)) * enorm;
      if (v > 0.0) {
        fb.weights[f * n_bins + b] = v;
        begin = std::min(begin, b);
        end = b + 1;
      }
    }
    if (begin >= end) {
      std::cerr << "mel_filterbank: filter " << f
                << " is empty (n_mels too large for n_fft resolution)\n";
      begin = 0;
      end = 0;
    }
    fb.support[f] = {begin, end};
  }
  return fb;
}

FeatureMatrix mel_spectrogram(const MonoClip& clip, int n_mels,
                              const StftParams& params) {
  const StftGrid grid = stft(clip, params);
  const FilterBank fb = mel_filterbank(clip.sample_rate, params.n_fft, n_mels);
  std::vector<double> m = project(power_spectrogram(grid), grid.n_frames, fb);
  power_to_db(m);

  FeatureMatrix fm;
  fm.n_frames = grid.n_frames;
  fm.n_coeffs = fb.n_filters;
  fm.values = std::move(m);
  fm.kind = FeatureKind::mel;
  fm.frame_hop = params.hop;
  fm.sample_rate = clip.sample_rate;
  return fm;
}

std::vector<double> dct_ii(std::span<const double> v, size_t n_out) {
  if (n_out > v.size()) {
    throw InvalidArgument("dct_ii: n_out exceeds input length");
  }
  const auto m = dct_matrix(v.size(), n_out);
  std::vector<double> out(n_out, 0.0);
  for (size_t k = 0; k < n_out; ++k) {
    double acc = 0.0;
    const double* row = m.data() + k * v.size();
    for (size_t j = 0; j < v.size(); ++j) acc += row[j] * v[j];
    out[k] = acc;
  }
  return out;
}

FeatureMatrix mfcc(const MonoClip& clip, int n_mfcc, int n_mels,
                   const StftParams& params) {
  if (n_mfcc > n_mels) throw InvalidArgument("mfcc: n_mfcc exceeds n_mels");
  FeatureMatrix mel = mel_spectrogram(clip, n_mels, params);

  const size_t n = mel.n_coeffs;
  const size_t n_out = static_cast<size_t>(n_mfcc);
  const auto dct = dct_matrix(n, n_out);

  FeatureMatrix fm;
  fm.n_frames = mel.n_frames;
  fm.n_coeffs = n_out;
  fm.values.resize(fm.n_frames * n_out);
  fm.kind = FeatureKind::mfcc;
  fm.frame_hop = params.hop;
  fm.sample_rate = clip.sample_rate;
  for (size_t t = 0; t < mel.n_frames; ++t) {
    const double* in = mel.values.data() + t * n;
    double* out = fm.values.data() + t * n_out;
    for (size_t k = 0; k < n_out; ++k) {
      double acc = 0.0;
      const double* row = dct.data() + k * n;
      for (size_t j = 0; j < n; ++j) acc += row[j] * in[j];
      out[k] = acc;
    }
  }
  return fm;
}

double erb_bandwidth(double center_hz) {
  if (center_hz <= 0.0) {
    throw InvalidArgument("erb_bandwidth: center frequency must be positive");
  }
  return 24.7 * (1.0 + 4.37 * center_hz / 1000.0);
}

double gammatone_ir(const GammatoneParams& p, double t_seconds) {
  if (t_seconds < 0.0) throw InvalidArgument("gammatone_ir: t must be >= 0");
  return p.amplitude * std::pow(t_seconds, p.order - 1) *
         std::exp(-2.0 * M_PI * p.bandwidth_hz * t_seconds) *
         std::cos(2.0 * M_PI * p.center_hz * t_seconds + p.phase);
}

FilterBank gammatone_filterbank(int sample_rate, int n_fft, int n_filters,
                                double f_min, double f_max) {
  if (n_filters < 1) {
    throw InvalidArgument("gammatone_filterbank: n_filters must be >= 1");
  }
  if (f_max < 0) f_max = sample_rate / 2.0;
  if (!(f_min < f_max) || f_max > sample_rate / 2.0 + 1e-9 || f_min <= 0.0) {
    throw InvalidArgument(
        "gammatone_filterbank: need 0 < f_min < f_max <= sample_rate/2");
  }

  const size_t n_bins = static_cast<size_t>(n_fft) / 2 + 1;
  const size_t nf = static_cast<size_t>(n_filters);

  FilterBank fb;
  fb.n_filters = nf;
  fb.n_bins = n_bins;
  fb.kind = FilterKind::gammatone;
  fb.weights.assign(nf * n_bins, 0.0);
  fb.center_freqs.resize(nf);
  fb.support.assign(nf, {0, n_bins});

  const double erb_lo = hz_to_erb_rate(f_min);
  const double erb_hi = hz_to_erb_rate(f_max);
  const size_t ir_len = std::min(
      static_cast<size_t>(n_fft),
      static_cast<size_t>(std::llround(kGammatoneIrSeconds * sample_rate)));

  std::vector<double> ir(ir_len);
  for (size_t f = 0; f < nf; ++f) {
    const double erbs =
        nf == 1 ? erb_lo
                : erb_lo + (erb_hi - erb_lo) * static_cast<double>(f) /
                               static_cast<double>(nf - 1);
    const double fc = erb_rate_to_hz(erbs);
    fb.center_freqs[f] = fc;

    GammatoneParams params;
    params.bandwidth_hz = 1.019 * erb_bandwidth(fc);
    params.center_hz = fc;
    for (size_t i = 0; i < ir_len; ++i) {
      ir[i] = gammatone_ir(params, static_cast<double>(i) / sample_rate);
    }
    const auto spec = fft::rfft(ir, static_cast<size_t>(n_fft));
    double peak = 0.0;
    double* row = fb.weights.data() + f * n_bins;
    for (size_t b = 0; b < n_bins; ++b) {
      row[b] = std::abs(spec[b]);
      peak = std::max(peak, row[b]);
    }
    if (peak > 0.0) {
      for (size_t b = 0; b < n_bins; ++b) row[b] /= peak;
    }
  }
  return fb;
}

FeatureMatrix gfcc(const MonoClip& clip, int n_ceps, int n_filters,
                   const StftParams& params) {
  if (n_ceps > n_filters) {
    throw InvalidArgument("gfcc: n_ceps exceeds n_filters");
  }
  const StftGrid grid = stft(clip, params);
  const FilterBank fb =
      gammatone_filterbank(clip.sample_rate, params.n_fft, n_filters);
  std::vector<double> energy = project(power_spectrogram(grid), grid.n_frames, fb);
  for (double& v : energy) v = std::log(v + kGfccEps);

  const size_t n = fb.n_filters;
  const size_t n_out = static_cast<size_t>(n_ceps);
  const auto dct = dct_matrix(n, n_out);

  FeatureMatrix fm;
  fm.n_frames = grid.n_frames;
  fm.n_coeffs = n_out;
  fm.values.resize(fm.n_frames * n_out);
  fm.kind = FeatureKind::gfcc;
  fm.frame_hop = params.hop;
  fm.sample_rate = clip.sample_rate;
  for (size_t t = 0; t < fm.n_frames; ++t) {
    const double* in = energy.data() + t * n;
    double* out = fm.values.data() + t * n_out;
    for (size_t k = 0; k < n_out; ++k) {
      double acc = 0.0;
      const double* row = dct.data() + k * n;
      for (size_t j = 0; j < n; ++j) acc += row[j] * in[j];
      out[k] = acc;
    }
  }
  return fm;
}

void write_feature_csv(std::ostream& out, const FeatureMatrix& fm) {
  for (size_t c = 0; c < fm.n_coeffs; ++c) {
    out << (c ? "," : "") << "c" << c;
  }
  out << "\n";
  char buf[32];
  for (size_t t = 0; t < fm.n_frames; ++t) {
    for (size_t c = 0; c < fm.n_coeffs; ++c) {
      std::snprintf(buf, sizeof buf, "%.9g", fm.at(t, c));
      out << (c ? "," : "") << buf;
    }
    out << "\n";
  }
}

FeatureMatrix read_feature_csv(std::istream& in, FeatureKind kind) {
  const CsvTable table = read_csv(in, "feature csv");
  FeatureMatrix fm;
  fm.kind = kind;
  fm.n_frames = table.rows.size();
  fm.n_coeffs = table.header.size();
  fm.values.reserve(fm.n_frames * fm.n_coeffs);
  for (const auto& row : table.rows) {
    if (row.size() != fm.n_coeffs) {
      throw InvalidArgument("feature csv: ragged row");
    }
    for (const auto& cell : row) fm.values.push_back(std::stod(cell));
  }
  return fm;
}

void write_feature_pgm(std::ostream& out, const FeatureMatrix& fm) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const double v : fm.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
  out << "P5\n" << fm.n_frames << " " << fm.n_coeffs << "\n255\n";
  // coefficient 0 at the bottom, like a spectrogram plot
  for (size_t c = fm.n_coeffs; c-- > 0;) {
    for (size_t t = 0; t < fm.n_frames; ++t) {
      const auto px = static_cast<uint8_t>(
          std::lround((fm.at(t, c) - lo) * scale));
      out.put(static_cast<char>(px));
    }
  }
}

}  // namespace avc
