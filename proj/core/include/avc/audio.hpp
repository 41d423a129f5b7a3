#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace avc {

// Raw decoded audio, one sample sequence per channel, samples in [-1, 1].
struct RawClip {
  std::vector<std::vector<double>> channels;
  int sample_rate = 0;
};

// Single-channel audio; the unit that flows through the whole pipeline.
struct MonoClip {
  std::vector<double> samples;
  int sample_rate = 0;
};

enum class WavEncoding { pcm_s16le, float32 };

// RIFF/WAVE, PCM s16le or IEEE float32, 1-2 channels. 16-bit samples are
// scaled by 1/32768; float samples are clamped into [-1, 1].
RawClip decode_wav(std::span<const uint8_t> bytes);
RawClip decode_wav_file(const std::string& path);

std::vector<uint8_t> encode_wav(const MonoClip& clip,
                                WavEncoding encoding = WavEncoding::pcm_s16le);
void write_wav_file(const std::string& path, const MonoClip& clip,
                    WavEncoding encoding = WavEncoding::pcm_s16le);

// Per-sample mean over channels.
MonoClip downmix(const RawClip& clip);

// Polyphase windowed-sinc resampler (Kaiser-windowed low-pass at the smaller
// Nyquist). Output length is ceil(n * target_rate / source_rate).
MonoClip resample(const MonoClip& clip, int target_rate);

// Pads the tail with zeros or trims it so the clip lasts exactly `seconds`.
MonoClip fix_duration(const MonoClip& clip, double seconds = 2.0);

// decode -> downmix -> resample -> fix_duration with the pipeline defaults.
MonoClip normalize_clip(const RawClip& clip, int target_rate = 22050,
                        double seconds = 2.0);

}  // namespace avc
