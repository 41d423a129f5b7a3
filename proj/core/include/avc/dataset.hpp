#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace avc {

// The four-class task. "none" is the no-vehicle / background class.
enum class ClassLabel { car = 0, truck = 1, motorcycle = 2, none = 3 };

constexpr std::array<ClassLabel, 4> kAllClasses = {
    ClassLabel::car, ClassLabel::truck, ClassLabel::motorcycle,
    ClassLabel::none};

const char* to_string(ClassLabel label);
ClassLabel class_label_from_string(const std::string& name);

enum class Mic { se, me, unknown };
enum class Road { dry, wet, unknown };
enum class Split { train, val, test, unassigned };

const char* to_string(Mic mic);
const char* to_string(Road road);
const char* to_string(Split split);

struct SampleRecord {
  std::string path;
  ClassLabel label = ClassLabel::none;
  int speed_kmh = 0;  // 30 / 50 / 70, 0 = unknown
  Mic mic = Mic::unknown;
  Road road = Road::unknown;
  bool synthetic = false;
  Split split = Split::unassigned;
};

struct SplitSpec {
  enum class Mode { by_speed, shuffled };
  Mode mode = Mode::shuffled;
  double train_fraction = 0.7;  // shuffled mode
  uint64_t seed = 0;
};

// CSV with header `path,label,speed_kmh,mic,road` plus optional `synthetic`
// and `split` columns. Relative paths resolve against the manifest location.
// All row errors are collected and reported in one ManifestError.
std::vector<SampleRecord> load_manifest(const std::string& path,
                                        bool verify_files = true);

// Writes the extended manifest (synthetic + split columns). Paths under
// base_dir are written relative to it; pass "" to keep paths as-is.
void save_manifest(const std::string& path,
                   const std::vector<SampleRecord>& records,
                   const std::string& base_dir = "",
                   const std::string& fingerprint = "");

// 30/50 km/h -> train pool (then a seeded, stratified val carve of
// val_fraction), 70 km/h -> test. Unknown speeds are an error.
std::vector<SampleRecord> split_by_speed(std::vector<SampleRecord> records,
                                         double val_fraction = 0.1,
                                         uint64_t seed = 0);

// Keeps a seeded uniform draw of per_class records for each targeted class;
// non-targeted classes pass through untouched.
std::vector<SampleRecord> balanced_subsample(
    const std::vector<SampleRecord>& records, size_t per_class,
    const std::set<ClassLabel>& targets, uint64_t seed);

// Seeded global shuffle, then train/test split at round(train_fraction * n).
// Synthetic records landing in test raise SplitError unless allowed.
std::vector<SampleRecord> shuffle_split(std::vector<SampleRecord> records,
                                        double train_fraction = 0.7,
                                        uint64_t seed = 0,
                                        bool allow_synthetic_test = false);

}  // namespace avc
