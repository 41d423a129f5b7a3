#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace oracle {

namespace {

double reflect_sample(const std::vector<double>& x, long long i) {
  const long long n = static_cast<long long>(x.size());
  if (n == 1) return x[0];
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return x[static_cast<size_t>(i)];
}

double slaney_hz_to_mel(double hz) {
  const double f_sp = 200.0 / 3.0;
  if (hz < 1000.0) return hz / f_sp;
  return 15.0 + std::log(hz / 1000.0) / (std::log(6.4) / 27.0);
}

double slaney_mel_to_hz(double mel) {
  const double f_sp = 200.0 / 3.0;
  if (mel < 15.0) return mel * f_sp;
  return 1000.0 * std::exp((std::log(6.4) / 27.0) * (mel - 15.0));
}

std::vector<double> mel_break_freqs(int n_mels, double f_min, double f_max) {
  std::vector<double> freqs(static_cast<size_t>(n_mels) + 2);
  const double lo = slaney_hz_to_mel(f_min);
  const double hi = slaney_hz_to_mel(f_max);
  for (size_t i = 0; i < freqs.size(); ++i) {
    freqs[i] = slaney_mel_to_hz(lo + (hi - lo) * static_cast<double>(i) /
                                         static_cast<double>(n_mels + 1));
  }
  return freqs;
}

}  // namespace

std::vector<std::complex<double>> direct_dft(const std::vector<double>& x) {
  const size_t n = x.size();
  std::vector<std::complex<double>> out(n / 2 + 1);
  for (size_t k = 0; k < out.size(); ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (size_t j = 0; j < n; ++j) {
      const double angle = -2.0 * M_PI * static_cast<double>(k) *
                           static_cast<double>(j) / static_cast<double>(n);
      acc += x[j] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

std::vector<double> framed_window(const std::vector<double>& signal, size_t t,
                                  size_t n_fft, size_t win_length, size_t hop) {
  std::vector<double> frame(n_fft, 0.0);
  const size_t w_off = (n_fft - win_length) / 2;
  const long long start = static_cast<long long>(t * hop) -
                          static_cast<long long>(n_fft / 2);
  for (size_t i = 0; i < win_length; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) /
                                          static_cast<double>(win_length));
    frame[w_off + i] =
        w * reflect_sample(signal, start + static_cast<long long>(w_off + i));
  }
  return frame;
}

std::vector<double> direct_dct_ii(const std::vector<double>& v, size_t n_out) {
  const size_t n = v.size();
  std::vector<double> y(n_out, 0.0);
  for (size_t k = 0; k < n_out; ++k) {
    double acc = 0.0;
    for (size_t j = 0; j < n; ++j) {
      acc += v[j] * std::cos(M_PI * static_cast<double>(k) *
                             (2.0 * static_cast<double>(j) + 1.0) /
                             (2.0 * static_cast<double>(n)));
    }
    y[k] = acc * (k == 0 ? std::sqrt(1.0 / static_cast<double>(n))
                         : std::sqrt(2.0 / static_cast<double>(n)));
  }
  return y;
}

std::vector<double> direct_dct_iii(const std::vector<double>& y) {
  const size_t n = y.size();
  std::vector<double> v(n, 0.0);
  for (size_t j = 0; j < n; ++j) {
    double acc = std::sqrt(1.0 / static_cast<double>(n)) * y[0];
    for (size_t k = 1; k < n; ++k) {
      acc += std::sqrt(2.0 / static_cast<double>(n)) * y[k] *
             std::cos(M_PI * static_cast<double>(k) *
                      (2.0 * static_cast<double>(j) + 1.0) /
                      (2.0 * static_cast<double>(n)));
    }
    v[j] = acc;
  }
  return v;
}

double direct_mel_weight(int sample_rate, int n_fft, int n_mels, double f_min,
                         double f_max, size_t filter, size_t bin) {
  const auto freqs = mel_break_freqs(n_mels, f_min, f_max);
  const double lower = freqs[filter];
  const double center = freqs[filter + 1];
  const double upper = freqs[filter + 2];
  const double hz = static_cast<double>(sample_rate) *
                    static_cast<double>(bin) / static_cast<double>(n_fft);
  const double tri =
      std::max(0.0, std::min((hz - lower) / (center - lower),
                             (upper - hz) / (upper - center)));
  return tri * 2.0 / (upper - lower);
}

std::vector<double> direct_mel_row(int sample_rate, int n_fft, int n_mels,
                                   double f_min, double f_max, size_t filter) {
  std::vector<double> row(static_cast<size_t>(n_fft) / 2 + 1);
  for (size_t b = 0; b < row.size(); ++b) {
    row[b] = direct_mel_weight(sample_rate, n_fft, n_mels, f_min, f_max, filter, b);
  }
  return row;
}

double direct_gammatone_center(int n_filters, double f_min, double f_max,
                               size_t filter) {
  auto to_erbs = [](double f) { return 21.4 * std::log10(1.0 + 0.00437 * f); };
  auto from_erbs = [](double e) {
    return (std::pow(10.0, e / 21.4) - 1.0) / 0.00437;
  };
  const double lo = to_erbs(f_min), hi = to_erbs(f_max);
  const double e = n_filters == 1
                       ? lo
                       : lo + (hi - lo) * static_cast<double>(filter) /
                                 static_cast<double>(n_filters - 1);
  return from_erbs(e);
}

std::vector<double> direct_gammatone_row(int sample_rate, int n_fft,
                                         int n_filters, double f_min,
                                         double f_max, size_t filter) {
  const double fc = direct_gammatone_center(n_filters, f_min, f_max, filter);
  const double erb = 24.7 * (1.0 + 4.37 * fc / 1000.0);
  const double b = 1.019 * erb;

  const size_t ir_len = std::min(
      static_cast<size_t>(n_fft),
      static_cast<size_t>(std::llround(0.05 * sample_rate)));
  std::vector<double> ir(ir_len);
  for (size_t i = 0; i < ir_len; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    ir[i] = std::pow(t, 3) * std::exp(-2.0 * M_PI * b * t) *
            std::cos(2.0 * M_PI * fc * t);
  }

  const size_t n_bins = static_cast<size_t>(n_fft) / 2 + 1;
  std::vector<double> row(n_bins, 0.0);
  double peak = 0.0;
  for (size_t k = 0; k < n_bins; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (size_t j = 0; j < ir_len; ++j) {
      const double angle = -2.0 * M_PI * static_cast<double>(k) *
                           static_cast<double>(j) / static_cast<double>(n_fft);
      acc += ir[j] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    row[k] = std::abs(acc);
    peak = std::max(peak, row[k]);
  }
  if (peak > 0.0) {
    for (double& v : row) v /= peak;
  }
  return row;
}

namespace {

// direct |DFT|^2 frames of the whole signal, frame-major
std::vector<double> direct_power_frames(const std::vector<double>& signal,
                                        size_t& n_frames_out, size_t n_fft,
                                        size_t win, size_t hop) {
  const size_t n_frames = 1 + signal.size() / hop;
  const size_t n_bins = n_fft / 2 + 1;
  std::vector<double> power(n_frames * n_bins);
  for (size_t t = 0; t < n_frames; ++t) {
    const auto frame = framed_window(signal, t, n_fft, win, hop);
    const auto spec = direct_dft(frame);
    for (size_t b = 0; b < n_bins; ++b) {
      power[t * n_bins + b] = std::norm(spec[b]);
    }
  }
  n_frames_out = n_frames;
  return power;
}

}  // namespace

std::vector<double> direct_mel_spectrogram(const std::vector<double>& signal,
                                           int sample_rate, int n_mels) {
  const size_t n_fft = 2048, win = 1024, hop = 512;
  size_t n_frames = 0;
  const auto power = direct_power_frames(signal, n_frames, n_fft, win, hop);
  const size_t n_bins = n_fft / 2 + 1;

  std::vector<double> mel(n_frames * static_cast<size_t>(n_mels), 0.0);
  for (size_t f = 0; f < static_cast<size_t>(n_mels); ++f) {
    const auto row = direct_mel_row(sample_rate, static_cast<int>(n_fft),
                                    n_mels, 0.0, sample_rate / 2.0, f);
    for (size_t t = 0; t < n_frames; ++t) {
      double acc = 0.0;
      for (size_t b = 0; b < n_bins; ++b) acc += row[b] * power[t * n_bins + b];
      mel[t * static_cast<size_t>(n_mels) + f] = acc;
    }
  }

  double ref = 1e-10;
  for (const double v : mel) ref = std::max(ref, v);
  double top = -std::numeric_limits<double>::infinity();
  for (double& v : mel) {
    v = 10.0 * std::log10(std::max(v, 1e-10)) - 10.0 * std::log10(ref);
    top = std::max(top, v);
  }
  for (double& v : mel) v = std::max(v, top - 80.0);
  return mel;
}

std::vector<double> direct_mfcc(const std::vector<double>& signal,
                                int sample_rate, int n_mfcc, int n_mels) {
  const auto mel = direct_mel_spectrogram(signal, sample_rate, n_mels);
  const size_t n_frames = mel.size() / static_cast<size_t>(n_mels);
  std::vector<double> out(n_frames * static_cast<size_t>(n_mfcc));
  for (size_t t = 0; t < n_frames; ++t) {
    const std::vector<double> frame(
        mel.begin() + static_cast<long long>(t * n_mels),
        mel.begin() + static_cast<long long>((t + 1) * n_mels));
    const auto ceps = direct_dct_ii(frame, static_cast<size_t>(n_mfcc));
    std::copy(ceps.begin(), ceps.end(),
              out.begin() + static_cast<long long>(t * n_mfcc));
  }
  return out;
}

std::vector<double> direct_gfcc(const std::vector<double>& signal,
                                int sample_rate, int n_ceps, int n_filters) {
  const size_t n_fft = 2048, win = 1024, hop = 512;
  size_t n_frames = 0;
  const auto power = direct_power_frames(signal, n_frames, n_fft, win, hop);
  const size_t n_bins = n_fft / 2 + 1;

  std::vector<double> energy(n_frames * static_cast<size_t>(n_filters), 0.0);
  for (size_t f = 0; f < static_cast<size_t>(n_filters); ++f) {
    const auto row =
        direct_gammatone_row(sample_rate, static_cast<int>(n_fft), n_filters,
                             20.0, sample_rate / 2.0, f);
    for (size_t t = 0; t < n_frames; ++t) {
      double acc = 0.0;
      for (size_t b = 0; b < n_bins; ++b) acc += row[b] * power[t * n_bins + b];
      energy[t * static_cast<size_t>(n_filters) + f] = std::log(acc + 1e-10);
    }
  }

  std::vector<double> out(n_frames * static_cast<size_t>(n_ceps));
  for (size_t t = 0; t < n_frames; ++t) {
    const std::vector<double> frame(
        energy.begin() + static_cast<long long>(t * n_filters),
        energy.begin() + static_cast<long long>((t + 1) * n_filters));
    const auto ceps = direct_dct_ii(frame, static_cast<size_t>(n_ceps));
    std::copy(ceps.begin(), ceps.end(),
              out.begin() + static_cast<long long>(t * n_ceps));
  }
  return out;
}

std::vector<double> direct_resample(const std::vector<double>& x, int src_rate,
                                    int dst_rate) {
  if (src_rate == dst_rate) return x;
  long long g = std::gcd(static_cast<long long>(src_rate),
                         static_cast<long long>(dst_rate));
  const long long up = dst_rate / g;
  const long long down = src_rate / g;
  const double cutoff = 0.5 * std::min(1.0, static_cast<double>(up) /
                                                static_cast<double>(down));
  const int half = static_cast<int>(std::ceil(16.0 / (2.0 * cutoff)));

  auto bessel_i0 = [](double v) {
    const double hv = v / 2.0;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 64; ++k) {
      term *= (hv / k) * (hv / k);
      sum += term;
      if (term < sum * 1e-17) break;
    }
    return sum;
  };
  auto kernel = [&](double t) {
    const double r = t / half;
    if (r <= -1.0 || r >= 1.0) return 0.0;
    const double w = bessel_i0(8.6 * std::sqrt(1.0 - r * r)) / bessel_i0(8.6);
    const double arg = 2.0 * cutoff * t;
    const double s = arg == 0.0 ? 1.0 : std::sin(M_PI * arg) / (M_PI * arg);
    return 2.0 * cutoff * s * w;
  };

  const long long n_in = static_cast<long long>(x.size());
  const long long n_out = (n_in * up + down - 1) / down;
  std::vector<double> out(static_cast<size_t>(n_out), 0.0);
  for (long long n = 0; n < n_out; ++n) {
    const long long num = n * down;
    const long long base = num / up;
    const double frac = static_cast<double>(num % up) / static_cast<double>(up);
    double acc = 0.0, norm = 0.0;
    for (int j = -half; j <= half; ++j) {
      const double h = kernel(frac + j);
      norm += h;
      const long long k = base - j;
      if (k >= 0 && k < n_in) acc += h * x[static_cast<size_t>(k)];
    }
    out[static_cast<size_t>(n)] = norm != 0.0 ? acc / norm : 0.0;
  }
  return out;
}

std::vector<double> finite_difference(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double h) {
  std::vector<double> grad(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f(x);
    x[i] = saved - h;
    const double down = f(x);
    x[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

double best_two_partition_inertia(
    const std::vector<std::vector<double>>& points) {
  const size_t n = points.size();
  if (n < 2 || n > 20) throw std::invalid_argument("need 2..20 points");
  const size_t dim = points[0].size();
  double best = std::numeric_limits<double>::infinity();
  // iterate over bit masks; fix point 0 in side A to halve the work
  for (size_t mask = 0; mask < (size_t{1} << (n - 1)); ++mask) {
    std::vector<double> mean_a(dim, 0.0), mean_b(dim, 0.0);
    size_t na = 0, nb = 0;
    for (size_t i = 0; i < n; ++i) {
      const bool in_a = i == 0 || !((mask >> (i - 1)) & 1);
      auto& mean = in_a ? mean_a : mean_b;
      (in_a ? na : nb)++;
      for (size_t d = 0; d < dim; ++d) mean[d] += points[i][d];
    }
    if (na == 0 || nb == 0) continue;
    for (size_t d = 0; d < dim; ++d) {
      mean_a[d] /= static_cast<double>(na);
      mean_b[d] /= static_cast<double>(nb);
    }
    double inertia = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const bool in_a = i == 0 || !((mask >> (i - 1)) & 1);
      const auto& mean = in_a ? mean_a : mean_b;
      for (size_t d = 0; d < dim; ++d) {
        const double diff = points[i][d] - mean[d];
        inertia += diff * diff;
      }
    }
    best = std::min(best, inertia);
  }
  return best;
}

}  // namespace oracle
