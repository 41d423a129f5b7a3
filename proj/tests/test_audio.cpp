#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "avc/audio.hpp"
#include "avc/errors.hpp"
#include "avc/features.hpp"
#include "avc/rng.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"

using namespace avc;

namespace {

std::vector<uint8_t> stereo_s16_wav(const std::vector<int16_t>& left,
                                    const std::vector<int16_t>& right,
                                    uint32_t rate) {
  std::vector<uint8_t> out;
  auto u16 = [&](uint16_t v) {
    out.push_back(v & 0xff);
    out.push_back(v >> 8);
  };
  auto u32 = [&](uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xff);
  };
  auto tag = [&](const char* t) { out.insert(out.end(), t, t + 4); };
  const uint32_t data = static_cast<uint32_t>(left.size()) * 4;
  tag("RIFF");
  u32(36 + data);
  tag("WAVE");
  tag("fmt ");
  u32(16);
  u16(1);
  u16(2);
  u32(rate);
  u32(rate * 4);
  u16(4);
  u16(16);
  tag("data");
  u32(data);
  for (size_t i = 0; i < left.size(); ++i) {
    u16(static_cast<uint16_t>(left[i]));
    u16(static_cast<uint16_t>(right[i]));
  }
  return out;
}

}  // namespace

TEST_CASE("decode_wav scales 16-bit PCM by 1/32768") {
  const auto bytes = stereo_s16_wav({16384}, {-32768}, 48000);
  const RawClip clip = decode_wav(bytes);
  CHECK(clip.channels.size() == 2);
  CHECK(clip.sample_rate == 48000);
  CHECK(clip.channels[0][0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(clip.channels[1][0] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("decode_wav preserves header fields") {
  const auto bytes = stereo_s16_wav({0, 0, 0}, {0, 0, 0}, 48000);
  const RawClip clip = decode_wav(bytes);
  CHECK(clip.channels.size() == 2);
  CHECK(clip.channels[0].size() == 3);
  CHECK(clip.sample_rate == 48000);
}

TEST_CASE("decode_wav rejects bad magic") {
  auto bytes = stereo_s16_wav({0}, {0}, 48000);
  std::memcpy(bytes.data(), "RIFX", 4);
  CHECK_THROWS_AS(decode_wav(bytes), DecodeError);
}

TEST_CASE("decode_wav rejects truncated data chunk") {
  auto bytes = stereo_s16_wav({1, 2, 3, 4}, {1, 2, 3, 4}, 48000);
  bytes.resize(bytes.size() - 6);
  CHECK_THROWS_AS(decode_wav(bytes), DecodeError);
}

TEST_CASE("decode_wav rejects unsupported formats") {
  auto bytes = stereo_s16_wav({1}, {1}, 48000);
  bytes[34] = 24;  // bit depth field
  CHECK_THROWS_AS(decode_wav(bytes), UnsupportedFormat);
}

TEST_CASE("decode_wav rejects more than two channels") {
  auto bytes = stereo_s16_wav({1, 2}, {1, 2}, 48000);
  bytes[22] = 4;  // channel count field
  CHECK_THROWS_AS(decode_wav(bytes), UnsupportedFormat);
}

TEST_CASE("decode -> encode -> decode round-trips 16-bit samples exactly") {
  Rng rng(11);
  MonoClip clip;
  clip.sample_rate = 22050;
  std::vector<int16_t> raw(5000);
  for (auto& s : raw) {
    s = static_cast<int16_t>(rng.below(65536) - 32768);
    clip.samples.push_back(static_cast<double>(s) / 32768.0);
  }
  const auto bytes = encode_wav(clip, WavEncoding::pcm_s16le);
  const RawClip back = decode_wav(bytes);
  REQUIRE(back.channels.size() == 1);
  REQUIRE(back.channels[0].size() == clip.samples.size());
  for (size_t i = 0; i < clip.samples.size(); ++i) {
    CHECK(back.channels[0][i] == clip.samples[i]);
  }
}

TEST_CASE("float32 WAV round-trip") {
  MonoClip clip = synth::tone(440.0, 0.4, 0.05, 22050);
  const auto bytes = encode_wav(clip, WavEncoding::float32);
  const RawClip back = decode_wav(bytes);
  REQUIRE(back.channels.size() == 1);
  REQUIRE(back.channels[0].size() == clip.samples.size());
  for (size_t i = 0; i < clip.samples.size(); ++i) {
    CHECK(back.channels[0][i] ==
          doctest::Approx(clip.samples[i]).epsilon(1e-7));
  }
}

TEST_CASE("downmix averages channels") {
  RawClip clip;
  clip.sample_rate = 48000;
  clip.channels = {{1.0}, {0.0}};
  CHECK(downmix(clip).samples[0] == doctest::Approx(0.5));

  clip.channels = {{0.25}, {0.75}};
  CHECK(downmix(clip).samples[0] == doctest::Approx(0.5));

  clip.channels = {{0.3, -0.3}};
  const MonoClip mono = downmix(clip);
  CHECK(mono.samples[0] == doctest::Approx(0.3));
  CHECK(mono.samples[1] == doctest::Approx(-0.3));
}

TEST_CASE("resample 48000 -> 22050 length arithmetic") {
  MonoClip clip;
  clip.sample_rate = 48000;
  clip.samples.assign(96000, 0.0);
  const MonoClip out = resample(clip, 22050);
  CHECK(out.samples.size() == 44100);  // ceil(96000 * 22050 / 48000)
  CHECK(out.sample_rate == 22050);
}

TEST_CASE("resample identity at equal rates") {
  MonoClip clip = synth::tone(1000.0, 0.5, 0.1, 22050);
  const MonoClip out = resample(clip, 22050);
  CHECK(out.samples == clip.samples);
}

TEST_CASE("resample keeps DC level") {
  MonoClip clip = synth::constant_clip(0.5, 0.5, 48000);
  const MonoClip out = resample(clip, 22050);
  for (size_t i = 100; i + 100 < out.samples.size(); ++i) {
    CHECK(out.samples[i] == doctest::Approx(0.5).epsilon(1e-3));
  }
}

TEST_CASE("resample matches the direct windowed-sinc oracle") {
  Rng rng(3);
  MonoClip clip;
  clip.sample_rate = 48000;
  for (int i = 0; i < 4800; ++i) clip.samples.push_back(rng.uniform(-0.5, 0.5));
  const MonoClip out = resample(clip, 22050);
  const auto expect = oracle::direct_resample(clip.samples, 48000, 22050);
  REQUIRE(out.samples.size() == expect.size());
  for (size_t i = 0; i < expect.size(); ++i) {
    CHECK(out.samples[i] == doctest::Approx(expect[i]).epsilon(1e-9));
  }
}

TEST_CASE("resample preserves tone frequency") {
  const double freq = 3000.0;
  MonoClip clip = synth::tone(freq, 0.5, 1.0, 48000);
  const MonoClip out = resample(clip, 22050);
  const auto mag = magnitude_spectrum(out);
  size_t peak = 0;
  for (size_t i = 1; i < mag.size(); ++i) {
    if (mag[i] > mag[peak]) peak = i;
  }
  const double bin_hz =
      22050.0 / static_cast<double>(out.samples.size());
  CHECK(std::abs(static_cast<double>(peak) * bin_hz - freq) <= bin_hz);
}

TEST_CASE("resample rejects non-positive target rates") {
  MonoClip clip = synth::constant_clip(0.1, 0.01, 48000);
  CHECK_THROWS_AS(resample(clip, 0), InvalidArgument);
  CHECK_THROWS_AS(resample(clip, -1), InvalidArgument);
}

TEST_CASE("fix_duration pads with trailing zeros") {
  MonoClip clip = synth::constant_clip(0.2, 1.0, 22050);
  clip.samples.resize(30000, 0.2);
  const MonoClip out = fix_duration(clip, 2.0);
  CHECK(out.samples.size() == 44100);
  for (size_t i = 30000; i < 44100; ++i) CHECK(out.samples[i] == 0.0);
}

TEST_CASE("fix_duration keeps exact-length clips") {
  MonoClip exact = synth::constant_clip(0.1, 2.0, 22050);
  CHECK(fix_duration(exact, 2.0).samples == exact.samples);
}

TEST_CASE("fix_duration trims over-long clips") {
  MonoClip clip;
  clip.sample_rate = 22050;
  for (int i = 0; i < 50000; ++i) clip.samples.push_back(i * 1e-5);
  const MonoClip out = fix_duration(clip, 2.0);
  REQUIRE(out.samples.size() == 44100);
  for (size_t i = 0; i < 44100; ++i) CHECK(out.samples[i] == clip.samples[i]);
}

TEST_CASE("fix_duration is idempotent") {
  Rng rng(5);
  MonoClip clip;
  clip.sample_rate = 22050;
  for (int i = 0; i < 31234; ++i) clip.samples.push_back(rng.uniform(-1.0, 1.0));
  const MonoClip once = fix_duration(clip, 2.0);
  const MonoClip twice = fix_duration(once, 2.0);
  CHECK(once.samples == twice.samples);
}

TEST_CASE("downmix and fix_duration commute") {
  Rng rng(9);
  RawClip clip;
  clip.sample_rate = 22050;
  clip.channels.assign(2, {});
  for (int i = 0; i < 30011; ++i) {
    clip.channels[0].push_back(rng.uniform(-1.0, 1.0));
    clip.channels[1].push_back(rng.uniform(-1.0, 1.0));
  }
  const MonoClip a = fix_duration(downmix(clip), 2.0);
  RawClip padded = clip;
  for (auto& ch : padded.channels) ch.resize(44100, 0.0);
  const MonoClip b = downmix(padded);
  REQUIRE(a.samples.size() == b.samples.size());
  for (size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i] == doctest::Approx(b.samples[i]).epsilon(1e-12));
  }
}
