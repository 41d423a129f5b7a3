#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "avc/augment.hpp"
#include "avc/config.hpp"
#include "avc/dataset.hpp"
#include "avc/eval.hpp"
#include "avc/nn.hpp"
#include "avc/quality.hpp"

namespace avc {

struct IngestStats {
  std::vector<SampleRecord> records;  // paths point at the cache
  size_t decoded = 0;
  size_t cache_hits = 0;
  std::vector<std::string> errors;  // per-file failures, collected
};

// decode -> downmix -> resample -> fix_duration for every manifest clip,
// cached under out_dir/cache keyed by source content hash. Writes
// normalized_manifest.csv and ingest_index.csv.
IngestStats ingest_manifest(const std::string& manifest_path,
                            const std::string& out_dir, int jobs,
                            int target_rate = 22050, double seconds = 2.0,
                            const std::string& fingerprint = "");

// Loader for normalized cache clips (plain WAV decode + downmix).
ClipLoader file_clip_loader();

struct QualityStage {
  QualityFilterResult filter;
  std::vector<SampleRecord> records;  // kept
};

// Runs the rejection stage and writes quality_report.csv, rmse_curves.csv,
// kept_manifest.csv and rejected_manifest.csv under out_dir.
QualityStage run_quality_stage(const std::vector<SampleRecord>& records,
                               ClassLabel target, uint64_t seed,
                               const ClipLoader& load,
                               const std::string& out_dir,
                               const std::string& fingerprint);

// Stretches records of the targeted classes into save_dir, passing everything
// else through; stretched copies follow their source record.
std::vector<SampleRecord> run_augment_stage(
    const std::vector<SampleRecord>& records, const StretchSpec& spec,
    const std::set<ClassLabel>& classes, const ClipLoader& load,
    const std::string& save_dir);

// Feature tensors aligned with `records`, extracted in parallel.
std::vector<nn::TrainExample> extract_features(
    const std::vector<SampleRecord>& records, FeatureKind kind, int jobs,
    const ClipLoader& load);

struct PipelineResult {
  EvalReport report;
  nn::TrainReport train_report;
  std::string checkpoint_path;
  std::string fingerprint;
  size_t n_train = 0, n_val = 0, n_test = 0;
};

// The full experiment: ingest -> quality gate -> augmentation -> features ->
// split -> train -> evaluate, everything seeded from the config.
PipelineResult run_pipeline(const RunConfig& config, std::ostream& log);

}  // namespace avc
