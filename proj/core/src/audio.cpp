#include "avc/audio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "avc/errors.hpp"
#include "avc/util.hpp"

namespace avc {

namespace {

uint16_t read_u16(std::span<const uint8_t> b, size_t off) {
  return static_cast<uint16_t>(b[off] | (b[off + 1] << 8));
}

uint32_t read_u32(std::span<const uint8_t> b, size_t off) {
  return static_cast<uint32_t>(b[off]) | (static_cast<uint32_t>(b[off + 1]) << 8) |
         (static_cast<uint32_t>(b[off + 2]) << 16) |
         (static_cast<uint32_t>(b[off + 3]) << 24);
}

bool chunk_id_is(std::span<const uint8_t> b, size_t off, const char* id) {
  return std::memcmp(b.data() + off, id, 4) == 0;
}

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatIeeeFloat = 3;

}  // namespace

RawClip decode_wav(std::span<const uint8_t> bytes) {
  if (bytes.size() < 12 || !chunk_id_is(bytes, 0, "RIFF") ||
      !chunk_id_is(bytes, 8, "WAVE")) {
    throw DecodeError("not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  uint16_t format = 0, channels = 0, block_align = 0, bits = 0;
  uint32_t sample_rate = 0;
  size_t data_off = 0, data_size = 0;
  bool have_data = false;

  size_t off = 12;
  while (off + 8 <= bytes.size()) {
    const uint32_t size = read_u32(bytes, off + 4);
    const size_t body = off + 8;
    if (chunk_id_is(bytes, off, "fmt ")) {
      if (size < 16 || body + 16 > bytes.size()) {
        throw DecodeError("truncated fmt chunk");
      }
      format = read_u16(bytes, body);
      channels = read_u16(bytes, body + 2);
      sample_rate = read_u32(bytes, body + 4);
      block_align = read_u16(bytes, body + 12);
      bits = read_u16(bytes, body + 14);
      have_fmt = true;
    } else if (chunk_id_is(bytes, off, "data")) {
      data_off = body;
      data_size = size;
      have_data = true;
      if (body + size > bytes.size()) {
        throw DecodeError("truncated data chunk");
      }
    }
    off = body + size + (size & 1);
  }

  if (!have_fmt) throw DecodeError("missing fmt chunk");
  if (!have_data) throw DecodeError("missing data chunk");
  if (sample_rate == 0) throw DecodeError("zero sample rate");
  if (channels < 1 || channels > 2) {
    throw UnsupportedFormat("unsupported channel count: " +
                            std::to_string(channels));
  }

  size_t bytes_per_sample;
  if (format == kFormatPcm && bits == 16) {
    bytes_per_sample = 2;
  } else if (format == kFormatIeeeFloat && bits == 32) {
    bytes_per_sample = 4;
  } else {
    throw UnsupportedFormat("unsupported codec: format=" +
                            std::to_string(format) + " bits=" +
                            std::to_string(bits));
  }
  const size_t frame_bytes = bytes_per_sample * channels;
  if (block_align != 0 && block_align != frame_bytes) {
    throw DecodeError("inconsistent block alignment");
  }
  const size_t n_frames = data_size / frame_bytes;

  RawClip clip;
  clip.sample_rate = static_cast<int>(sample_rate);
  clip.channels.assign(channels, std::vector<double>(n_frames));
  const uint8_t* p = bytes.data() + data_off;
  for (size_t i = 0; i < n_frames; ++i) {
    for (size_t c = 0; c < channels; ++c) {
      double v;
      if (bytes_per_sample == 2) {
        const int16_t s = static_cast<int16_t>(p[0] | (p[1] << 8));
        v = static_cast<double>(s) / 32768.0;
      } else {
        uint32_t u;
        std::memcpy(&u, p, 4);
        v = std::clamp(static_cast<double>(std::bit_cast<float>(u)), -1.0, 1.0);
      }
      clip.channels[c][i] = v;
      p += bytes_per_sample;
    }
  }
  return clip;
}

RawClip decode_wav_file(const std::string& path) {
  const std::string data = read_file(path);
  return decode_wav(std::span<const uint8_t>(
      reinterpret_cast<const uint8_t*>(data.data()), data.size()));
}

std::vector<uint8_t> encode_wav(const MonoClip& clip, WavEncoding encoding) {
  const bool is_float = encoding == WavEncoding::float32;
  const uint16_t format = is_float ? kFormatIeeeFloat : kFormatPcm;
  const uint16_t bits = is_float ? 32 : 16;
  const uint16_t block = bits / 8;
  const uint32_t n = static_cast<uint32_t>(clip.samples.size());
  const uint32_t data_bytes = n * block;
  // float WAVs get a fact chunk per the spec of the format
  const uint32_t fact_bytes = is_float ? 12 : 0;
  const uint32_t riff_size = 4 + 24 + fact_bytes + 8 + data_bytes;

  std::vector<uint8_t> out;
  out.reserve(8 + riff_size);
  auto put_u16 = [&](uint16_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xff));
    out.push_back(static_cast<uint8_t>(v >> 8));
  };
  auto put_u32 = [&](uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
  };
  auto put_tag = [&](const char* tag) {
    out.insert(out.end(), tag, tag + 4);
  };

  put_tag("RIFF");
  put_u32(riff_size);
  put_tag("WAVE");
  put_tag("fmt ");
  put_u32(16);
  put_u16(format);
  put_u16(1);  // mono
  put_u32(static_cast<uint32_t>(clip.sample_rate));
  put_u32(static_cast<uint32_t>(clip.sample_rate) * block);
  put_u16(block);
  put_u16(bits);
  if (is_float) {
    put_tag("fact");
    put_u32(4);
    put_u32(n);
  }
  put_tag("data");
  put_u32(data_bytes);
  for (const double x : clip.samples) {
    if (is_float) {
      const float f = static_cast<float>(x);
      uint32_t u = std::bit_cast<uint32_t>(f);
      put_u32(u);
    } else {
      const double scaled = std::round(x * 32768.0);
      const int16_t s = static_cast<int16_t>(
          std::clamp(scaled, -32768.0, 32767.0));
      put_u16(static_cast<uint16_t>(s));
    }
  }
  return out;
}

void write_wav_file(const std::string& path, const MonoClip& clip,
                    WavEncoding encoding) {
  const auto bytes = encode_wav(clip, encoding);
  write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                    bytes.size()));
}

MonoClip downmix(const RawClip& clip) {
  if (clip.channels.empty()) {
    throw InvalidArgument("downmix: clip has no channels");
  }
  const size_t n = clip.channels[0].size();
  MonoClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.resize(n);
  const double scale = 1.0 / static_cast<double>(clip.channels.size());
  for (size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (const auto& ch : clip.channels) acc += ch[i];
    out.samples[i] = acc * scale;
  }
  return out;
}

namespace {

// Modified Bessel function of the first kind, order zero (series form).
double bessel_i0(double x) {
  const double half = x / 2.0;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 64; ++k) {
    term *= (half / k) * (half / k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

double sinc_pi(double x) {
  if (x == 0.0) return 1.0;
  const double px = M_PI * x;
  return std::sin(px) / px;
}

constexpr int kZeroCrossings = 16;
constexpr double kKaiserBeta = 8.6;

// Low-pass kernel at normalized cutoff fc (cycles per input sample),
// Kaiser-windowed with half-width `half` input samples.
double lowpass_tap(double t, double fc, double half) {
  const double r = t / half;
  if (r <= -1.0 || r >= 1.0) return 0.0;
  const double window =
      bessel_i0(kKaiserBeta * std::sqrt(1.0 - r * r)) / bessel_i0(kKaiserBeta);
  return 2.0 * fc * sinc_pi(2.0 * fc * t) * window;
}

}  // namespace

MonoClip resample(const MonoClip& clip, int target_rate) {
  if (target_rate <= 0) {
    throw InvalidArgument("resample: target_rate must be positive");
  }
  if (clip.sample_rate <= 0) {
    throw InvalidArgument("resample: clip has no sample rate");
  }
  if (clip.sample_rate == target_rate) return clip;

  const int g = std::gcd(clip.sample_rate, target_rate);
  const int64_t up = target_rate / g;           // L
  const int64_t down = clip.sample_rate / g;    // M
  const double cutoff =
      0.5 * std::min(1.0, static_cast<double>(up) / static_cast<double>(down));
  const int half = static_cast<int>(std::ceil(kZeroCrossings / (2.0 * cutoff)));
  const int taps = 2 * half + 1;

  // Phase p holds the kernel sampled at fractional offsets p/up + j,
  // normalized so each phase sums to one (exact DC gain).
  std::vector<double> table(static_cast<size_t>(up) * taps);
  for (int64_t p = 0; p < up; ++p) {
    double sum = 0.0;
    const double frac = static_cast<double>(p) / static_cast<double>(up);
    for (int j = -half; j <= half; ++j) {
      const double v = lowpass_tap(frac + j, cutoff, half);
      table[static_cast<size_t>(p) * taps + (j + half)] = v;
      sum += v;
    }
    if (sum != 0.0) {
      for (int j = 0; j < taps; ++j) {
        table[static_cast<size_t>(p) * taps + j] /= sum;
      }
    }
  }

  const int64_t n_in = static_cast<int64_t>(clip.samples.size());
  const int64_t n_out = (n_in * up + down - 1) / down;  // ceil
  MonoClip out;
  out.sample_rate = target_rate;
  out.samples.resize(static_cast<size_t>(n_out));
  for (int64_t n = 0; n < n_out; ++n) {
    const int64_t num = n * down;
    const int64_t base = num / up;
    const int64_t phase = num % up;
    const double* h = table.data() + static_cast<size_t>(phase) * taps;
    double acc = 0.0;
    for (int j = -half; j <= half; ++j) {
      const int64_t k = base - j;
      if (k >= 0 && k < n_in) acc += h[j + half] * clip.samples[static_cast<size_t>(k)];
    }
    out.samples[static_cast<size_t>(n)] = acc;
  }
  return out;
}

MonoClip fix_duration(const MonoClip& clip, double seconds) {
  if (seconds <= 0.0) {
    throw InvalidArgument("fix_duration: seconds must be positive");
  }
  const size_t want = static_cast<size_t>(
      std::llround(seconds * static_cast<double>(clip.sample_rate)));
  MonoClip out;
  out.sample_rate = clip.sample_rate;
  out.samples = clip.samples;
  out.samples.resize(want, 0.0);  // post-pad or tail-trim
  return out;
}

MonoClip normalize_clip(const RawClip& clip, int target_rate, double seconds) {
  return fix_duration(resample(downmix(clip), target_rate), seconds);
}

}  // namespace avc
