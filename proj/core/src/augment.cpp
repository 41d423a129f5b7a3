#include "avc/augment.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>

#include "avc/errors.hpp"
#include "avc/features.hpp"
#include "avc/fft.hpp"

namespace avc {

namespace {

double wrap_phase(double x) {
  // into (-pi, pi]
  return x - 2.0 * M_PI * std::round(x / (2.0 * M_PI));
}

}  // namespace

MonoClip time_stretch(const MonoClip& clip, double factor) {
  if (factor <= 0.0) {
    throw InvalidArgument("time_stretch: factor must be positive");
  }
  if (clip.samples.empty()) {
    throw InvalidArgument("time_stretch: empty clip");
  }

  const StftParams params;  // module-standard 2048/1024/512
  const StftGrid grid = stft(clip, params);
  const size_t n_bins = grid.n_bins;
  const size_t n_fft = static_cast<size_t>(params.n_fft);
  const size_t hop = static_cast<size_t>(params.hop);
  const size_t win = static_cast<size_t>(params.win_length);

  const auto out_len = static_cast<size_t>(std::llround(
      static_cast<double>(clip.samples.size()) / factor));

  // Synthesis frame instants in analysis-frame index units. Steps past the
  // analysis grid read zero columns: they fade the content out while keeping
  // the overlap-add window sum in steady state across the retained samples
  // (a lone window edge would otherwise divide by a vanishing weight).
  const size_t min_steps = out_len / static_cast<size_t>(params.hop) + 2;
  std::vector<double> steps;
  for (double t = 0.0;
       t < static_cast<double>(grid.n_frames) || steps.size() < min_steps;
       t += factor) {
    steps.push_back(t);
  }
  const size_t n_steps = steps.size();

  // expected phase advance per hop for each bin
  std::vector<double> advance(n_bins);
  for (size_t b = 0; b < n_bins; ++b) {
    advance[b] = 2.0 * M_PI * static_cast<double>(b) *
                 static_cast<double>(hop) / static_cast<double>(n_fft);
  }

  auto column = [&](size_t t, size_t b) -> std::complex<double> {
    if (t >= grid.n_frames) return {0.0, 0.0};
    return grid.at(t, b);
  };

  // Magnitudes are linearly interpolated between neighbouring analysis
  // frames; phases accumulate the per-hop advance plus the wrapped deviation
  // measured between those frames.
  std::vector<double> phase(n_bins);
  for (size_t b = 0; b < n_bins; ++b) phase[b] = std::arg(column(0, b));

  std::vector<std::complex<double>> out_frames(n_steps * n_bins);
  std::vector<std::complex<double>> spec(n_bins);
  for (size_t s = 0; s < n_steps; ++s) {
    const double pos = steps[s];
    const auto t0 = static_cast<size_t>(pos);
    const double alpha = pos - static_cast<double>(t0);
    for (size_t b = 0; b < n_bins; ++b) {
      const std::complex<double> c0 = column(t0, b);
      const std::complex<double> c1 = column(t0 + 1, b);
      const double mag = (1.0 - alpha) * std::abs(c0) + alpha * std::abs(c1);
      out_frames[s * n_bins + b] = std::polar(mag, phase[b]);
      const double dphase =
          wrap_phase(std::arg(c1) - std::arg(c0) - advance[b]);
      phase[b] += advance[b] + dphase;
    }
  }

  // weighted overlap-add synthesis with squared-window normalization
  const std::vector<double> w = hann_window(win);
  const size_t w_off = (n_fft - win) / 2;
  const size_t ola_len = n_fft + hop * (n_steps > 0 ? n_steps - 1 : 0);
  std::vector<double> ola(ola_len, 0.0);
  std::vector<double> wsum(ola_len, 0.0);
  for (size_t s = 0; s < n_steps; ++s) {
    std::copy(out_frames.begin() + static_cast<ptrdiff_t>(s * n_bins),
              out_frames.begin() + static_cast<ptrdiff_t>((s + 1) * n_bins),
              spec.begin());
    const auto frame = fft::irfft(spec, n_fft);
    const size_t base = s * hop;
    for (size_t i = 0; i < win; ++i) {
      ola[base + w_off + i] += w[i] * frame[w_off + i];
      wsum[base + w_off + i] += w[i] * w[i];
    }
  }
  for (size_t i = 0; i < ola_len; ++i) {
    if (wsum[i] > 1e-12) ola[i] /= wsum[i];
  }

  MonoClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.assign(out_len, 0.0);
  const size_t lead = n_fft / 2;  // drop the analysis center padding
  for (size_t i = 0; i < out_len && lead + i < ola_len; ++i) {
    out.samples[i] = ola[lead + i];
  }

  // Phase re-accumulation can raise the crest factor well past the input
  // peak on broadband material; the later feature stages are level-relative,
  // so a peak guard keeps clips inside the never-amplify contract (and WAV
  // range) without audible cost.
  double in_peak = 0.0, out_peak = 0.0;
  for (const double s : clip.samples) in_peak = std::max(in_peak, std::abs(s));
  for (const double s : out.samples) out_peak = std::max(out_peak, std::abs(s));
  const double limit = std::min(1.1 * in_peak, 1.0);
  if (out_peak > limit && out_peak > 0.0) {
    const double scale = limit / out_peak;
    for (double& s : out.samples) s *= scale;
  }
  return out;
}

std::string stretch_suffix(double factor) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "_ts%03d",
                static_cast<int>(std::lround(factor * 100.0)));
  return buf;
}

std::vector<SampleRecord> augment_set(const std::vector<SampleRecord>& records,
                                      const StretchSpec& spec,
                                      const ClipLoader& load,
                                      const ClipSaver& save, double seconds) {
  for (const double f : spec.factors) {
    if (f <= 0.0) throw InvalidArgument("augment_set: factors must be positive");
    if (f == 1.0) {
      throw InvalidArgument(
          "augment_set: factor 1.0 is redundant with keep_original");
    }
  }

  std::vector<SampleRecord> out;
  out.reserve(records.size() * (spec.factors.size() + (spec.keep_original ? 1 : 0)));
  for (const auto& rec : records) {
    if (spec.keep_original) out.push_back(rec);
    for (const double f : spec.factors) {
      const MonoClip stretched =
          fix_duration(time_stretch(load(rec), f), seconds);
      SampleRecord copy = rec;
      copy.path = save(rec, stretch_suffix(f), stretched);
      copy.synthetic = true;
      out.push_back(std::move(copy));
    }
  }
  return out;
}

}  // namespace avc
