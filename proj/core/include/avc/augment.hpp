#pragma once

#include <functional>
#include <string>
#include <vector>

#include "avc/audio.hpp"
#include "avc/dataset.hpp"
#include "avc/quality.hpp"

namespace avc {

struct StretchSpec {
  std::vector<double> factors;  // all > 0 and != 1.0
  bool keep_original = true;
};

// Phase-vocoder time stretch (n_fft 2048, hop 512). factor > 1 shortens the
// clip, factor < 1 lengthens it; pitch is preserved. Output length is exactly
// round(input_length / factor).
MonoClip time_stretch(const MonoClip& clip, double factor);

// Stores a stretched copy next to its source; returns the new path/key.
using ClipSaver = std::function<std::string(
    const SampleRecord& base, const std::string& suffix, const MonoClip& clip)>;

// Emits the original (when keep_original) plus one stretched, re-normalized
// copy per factor, flagged synthetic. The suffix encodes the factor in
// percent, e.g. "_ts150" for 1.5.
std::vector<SampleRecord> augment_set(const std::vector<SampleRecord>& records,
                                      const StretchSpec& spec,
                                      const ClipLoader& load,
                                      const ClipSaver& save,
                                      double seconds = 2.0);

std::string stretch_suffix(double factor);

}  // namespace avc
