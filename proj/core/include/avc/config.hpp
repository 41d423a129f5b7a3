#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "avc/dataset.hpp"
#include "avc/features.hpp"

namespace avc {

// All configurable pipeline parameters, loadable from a flat key = value file
// with full command-line overrides. Seeds default deterministically off the
// master seed when not set explicitly.
struct RunConfig {
  std::string manifest;
  std::string out_dir;

  FeatureKind feature = FeatureKind::mfcc;

  bool quality_gate = true;
  ClassLabel quality_class = ClassLabel::truck;

  bool augment = true;
  std::vector<double> stretch_factors = {1.5, 0.8, 1.2};
  bool keep_original = true;
  std::set<ClassLabel> augment_classes = {ClassLabel::truck};

  SplitSpec::Mode split_mode = SplitSpec::Mode::shuffled;
  double train_fraction = 0.7;
  double val_fraction = 0.1;
  // The shuffled regime stretches first and shuffles afterwards, so synthetic
  // copies legitimately land in the test split; default mirrors that protocol.
  bool allow_synthetic_test = true;

  size_t subsample_per_class = 0;  // 0 = off
  std::set<ClassLabel> subsample_targets = {ClassLabel::car, ClassLabel::none};

  int epochs = 30;
  int batch_size = 32;
  double base_lr = 1e-3;
  double min_lr = 1e-5;
  int plateau_patience = 2;
  double plateau_factor = 0.1;
  double dropout = 0.3;

  uint64_t seed = 0;
  std::optional<uint64_t> quality_seed;
  std::optional<uint64_t> split_seed;
  std::optional<uint64_t> nn_seed;
  std::optional<uint64_t> subsample_seed;

  int jobs = 0;  // 0 = hardware concurrency

  static RunConfig from_file(const std::string& path);
  void apply_override(const std::string& key, const std::string& value);
  void apply_override(const std::string& key_equals_value);

  // Canonical sorted key = value text; excludes out_dir so identical runs
  // into different directories fingerprint identically.
  std::string resolved_text() const;
  std::string fingerprint() const;

  uint64_t effective_quality_seed() const { return quality_seed.value_or(seed); }
  uint64_t effective_split_seed() const { return split_seed.value_or(seed + 1); }
  uint64_t effective_nn_seed() const { return nn_seed.value_or(seed + 2); }
  uint64_t effective_subsample_seed() const {
    return subsample_seed.value_or(seed + 3);
  }
};

}  // namespace avc
