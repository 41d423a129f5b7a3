#include "avc/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "avc/augment.hpp"
#include "avc/clip_store.hpp"
#include "avc/csv.hpp"
#include "avc/errors.hpp"
#include "avc/util.hpp"

namespace fs = std::filesystem;

namespace avc {

namespace {

std::string relative_to(const std::string& path, const std::string& base) {
  if (base.empty()) return path;
  const auto rel = fs::path(path).lexically_relative(base);
  if (rel.empty() || rel.native().starts_with("..")) return path;
  return rel.string();
}

class StageTimer {
 public:
  StageTimer(std::ostream& log, std::string name)
      : log_(log), name_(std::move(name)),
        start_(std::chrono::steady_clock::now()) {
    log_ << "[stage] " << name_ << "...\n" << std::flush;
  }
  ~StageTimer() {
    const double s = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start_)
                         .count();
    char buf[64];
    std::snprintf(buf, sizeof buf, "[stage] %s done in %.2fs\n", name_.c_str(), s);
    log_ << buf << std::flush;
  }

 private:
  std::ostream& log_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

ClipLoader file_clip_loader() {
  return [](const SampleRecord& rec) { return downmix(decode_wav_file(rec.path)); };
}

IngestStats ingest_manifest(const std::string& manifest_path,
                            const std::string& out_dir, int jobs,
                            int target_rate, double seconds,
                            const std::string& fingerprint) {
  const auto records = load_manifest(manifest_path, /*verify_files=*/true);
  const fs::path cache_dir = fs::path(out_dir) / "cache";
  fs::create_directories(cache_dir);

  IngestStats stats;
  stats.records.resize(records.size());
  std::vector<std::string> errors(records.size());
  std::vector<char> decoded(records.size(), 0), hits(records.size(), 0);

  parallel_for(records.size(), jobs, [&](size_t i) {
    try {
      const std::string bytes = read_file(records[i].path);
      uint64_t h = fnv1a64(bytes);
      h ^= fnv1a64(std::to_string(target_rate) + ":" + std::to_string(seconds));
      const fs::path cached = cache_dir / (to_hex(h) + ".wav");

      if (fs::exists(cached)) {
        hits[i] = 1;
      } else {
        const RawClip raw = decode_wav(std::span<const uint8_t>(
            reinterpret_cast<const uint8_t*>(bytes.data()), bytes.size()));
        const MonoClip normalized = normalize_clip(raw, target_rate, seconds);
        // temp + rename so concurrent workers hashing the same source are safe
        const fs::path tmp =
            cache_dir / (to_hex(h) + ".tmp" + std::to_string(i));
        write_wav_file(tmp.string(), normalized, WavEncoding::float32);
        fs::rename(tmp, cached);
        decoded[i] = 1;
      }
      SampleRecord rec = records[i];
      rec.path = cached.string();
      stats.records[i] = std::move(rec);
    } catch (const std::exception& e) {
      errors[i] = records[i].path + ": " + e.what();
    }
  });

  for (size_t i = 0; i < records.size(); ++i) {
    if (!errors[i].empty()) stats.errors.push_back(errors[i]);
    stats.decoded += decoded[i];
    stats.cache_hits += hits[i];
  }
  if (!stats.errors.empty()) return stats;

  save_manifest((fs::path(out_dir) / "normalized_manifest.csv").string(),
                stats.records, out_dir, fingerprint);
  std::ofstream index((fs::path(out_dir) / "ingest_index.csv").string(),
                      std::ios::trunc);
  if (!index) throw IoError("cannot write ingest_index.csv");
  if (!fingerprint.empty()) index << "# config_fingerprint," << fingerprint << "\n";
  index << "cache,source\n";
  for (size_t i = 0; i < records.size(); ++i) {
    index << relative_to(stats.records[i].path, out_dir) << ','
          << records[i].path << "\n";
  }
  return stats;
}

QualityStage run_quality_stage(const std::vector<SampleRecord>& records,
                               ClassLabel target, uint64_t seed,
                               const ClipLoader& load,
                               const std::string& out_dir,
                               const std::string& fingerprint) {
  QualityStage stage;
  stage.filter = filter_by_quality(records, target, seed, load);

  const fs::path out(out_dir);
  {
    std::ofstream report((out / "quality_report.csv").string(), std::ios::trunc);
    if (!report) throw IoError("cannot write quality_report.csv");
    if (!fingerprint.empty()) report << "# config_fingerprint," << fingerprint << "\n";
    report << "path,class,mean_rmse,cluster,label\n";
    char buf[64];
    for (size_t j = 0; j < stage.filter.target_indices.size(); ++j) {
      const auto& rec = records[stage.filter.target_indices[j]];
      std::snprintf(buf, sizeof buf, "%.9g", stage.filter.target_mean_rmse[j]);
      report << csv_escape(relative_to(rec.path, out_dir)) << ','
             << to_string(rec.label) << ',' << buf << ','
             << stage.filter.target_cluster[j] << ','
             << to_string(stage.filter.target_label[j]) << "\n";
    }
  }
  {
    std::ofstream curves((out / "rmse_curves.csv").string(), std::ios::trunc);
    if (!curves) throw IoError("cannot write rmse_curves.csv");
    if (!fingerprint.empty()) curves << "# config_fingerprint," << fingerprint << "\n";
    curves << "path,frame,rmse\n";
    char buf[64];
    for (size_t j = 0; j < stage.filter.target_indices.size(); ++j) {
      const auto& rec = records[stage.filter.target_indices[j]];
      const std::string rel = relative_to(rec.path, out_dir);
      const auto& v = stage.filter.target_vectors[j];
      for (size_t t = 0; t < v.size(); ++t) {
        std::snprintf(buf, sizeof buf, "%.9g", v[t]);
        curves << csv_escape(rel) << ',' << t << ',' << buf << "\n";
      }
    }
  }
  save_manifest((out / "kept_manifest.csv").string(), stage.filter.kept,
                out_dir, fingerprint);
  save_manifest((out / "rejected_manifest.csv").string(), stage.filter.rejected,
                out_dir, fingerprint);
  stage.records = stage.filter.kept;
  return stage;
}

std::vector<SampleRecord> run_augment_stage(
    const std::vector<SampleRecord>& records, const StretchSpec& spec,
    const std::set<ClassLabel>& classes, const ClipLoader& load,
    const std::string& save_dir) {
  if (!save_dir.empty()) fs::create_directories(save_dir);
  DirClipStore store(save_dir);
  auto save = store.saver();

  std::vector<SampleRecord> targeted;
  for (const auto& rec : records) {
    if (classes.count(rec.label)) targeted.push_back(rec);
  }
  const auto augmented = augment_set(targeted, spec, load, save);

  // originals keep their place; stretched copies follow their source
  const size_t group = spec.factors.size() + (spec.keep_original ? 1 : 0);
  std::vector<SampleRecord> out;
  out.reserve(records.size() + targeted.size() * spec.factors.size());
  size_t gi = 0;
  for (const auto& rec : records) {
    if (classes.count(rec.label)) {
      for (size_t k = 0; k < group; ++k) out.push_back(augmented[gi * group + k]);
      ++gi;
    } else {
      out.push_back(rec);
    }
  }
  return out;
}

std::vector<nn::TrainExample> extract_features(
    const std::vector<SampleRecord>& records, FeatureKind kind, int jobs,
    const ClipLoader& load) {
  std::vector<nn::TrainExample> examples(records.size());
  parallel_for(records.size(), jobs, [&](size_t i) {
    const MonoClip clip = load(records[i]);
    FeatureMatrix fm;
    switch (kind) {
      case FeatureKind::mel: fm = mel_spectrogram(clip); break;
      case FeatureKind::mfcc: fm = mfcc(clip); break;
      case FeatureKind::gfcc: fm = gfcc(clip); break;
    }
    examples[i].features = nn::to_tensor(fm);
    examples[i].label = static_cast<int>(records[i].label);
  });
  return examples;
}

PipelineResult run_pipeline(const RunConfig& config, std::ostream& log) {
  if (config.manifest.empty()) throw ConfigError("pipeline: manifest not set");
  if (config.out_dir.empty()) throw ConfigError("pipeline: out directory not set");
  fs::create_directories(config.out_dir);

  const std::string fingerprint = config.fingerprint();
  write_file((fs::path(config.out_dir) / "run_config.txt").string(),
             "# config_fingerprint," + fingerprint + "\n" +
                 config.resolved_text());
  log << "config fingerprint " << fingerprint << "\n";

  // ingest
  std::vector<SampleRecord> records;
  {
    StageTimer timer(log, "ingest");
    IngestStats stats = ingest_manifest(config.manifest, config.out_dir,
                                        config.jobs, 22050, 2.0, fingerprint);
    if (!stats.errors.empty()) {
      std::ostringstream msg;
      msg << "pipeline stage ingest (index 0) failed on " << stats.errors.size()
          << " file(s)";
      for (const auto& e : stats.errors) msg << "\n  " << e;
      throw InvalidArgument(msg.str());
    }
    log << "  decoded=" << stats.decoded << " cache_hits=" << stats.cache_hits
        << " total=" << stats.records.size() << "\n";
    records = std::move(stats.records);
  }

  const ClipLoader load = file_clip_loader();

  // quality gate
  if (config.quality_gate) {
    StageTimer timer(log, "quality");
    QualityStage stage =
        run_quality_stage(records, config.quality_class,
                          config.effective_quality_seed(), load,
                          config.out_dir, fingerprint);
    log << "  target=" << to_string(config.quality_class)
        << " kept=" << stage.filter.target_vectors.size() -
                           stage.filter.rejected.size()
        << " rejected=" << stage.filter.rejected.size() << "\n";
    records = std::move(stage.records);
  } else {
    log << "[stage] quality skipped (gate off)\n";
  }

  // augmentation
  if (config.augment && !config.stretch_factors.empty()) {
    StageTimer timer(log, "augment");
    StretchSpec spec;
    spec.factors = config.stretch_factors;
    spec.keep_original = config.keep_original;
    const size_t before = records.size();
    records = run_augment_stage(
        records, spec, config.augment_classes, load,
        (fs::path(config.out_dir) / "augmented").string());
    save_manifest((fs::path(config.out_dir) / "augmented_manifest.csv").string(),
                  records, config.out_dir, fingerprint);
    log << "  records " << before << " -> " << records.size() << "\n";
  } else {
    log << "[stage] augment skipped\n";
  }

  // split
  {
    StageTimer timer(log, "split");
    if (config.split_mode == SplitSpec::Mode::shuffled) {
      records = shuffle_split(records, config.train_fraction,
                              config.effective_split_seed(),
                              config.allow_synthetic_test);
    } else {
      records = split_by_speed(records, config.val_fraction,
                               config.effective_split_seed());
    }
  }

  // optional balanced subsampling of the train split
  if (config.subsample_per_class > 0) {
    StageTimer timer(log, "subsample");
    std::vector<SampleRecord> train_pool, rest;
    for (const auto& rec : records) {
      (rec.split == Split::train ? train_pool : rest).push_back(rec);
    }
    train_pool = balanced_subsample(train_pool, config.subsample_per_class,
                                    config.subsample_targets,
                                    config.effective_subsample_seed());
    records = std::move(train_pool);
    records.insert(records.end(), rest.begin(), rest.end());
  }
  save_manifest((fs::path(config.out_dir) / "split_manifest.csv").string(),
                records, config.out_dir, fingerprint);

  // synthetic guard for regimes whose split did not already check
  if (!config.allow_synthetic_test) {
    for (const auto& rec : records) {
      if (rec.split == Split::test && rec.synthetic) {
        throw SplitError("pipeline: synthetic record in test split: " + rec.path);
      }
    }
  }

  // features
  std::vector<nn::TrainExample> examples;
  {
    StageTimer timer(log, "features");
    examples = extract_features(records, config.feature, config.jobs, load);
  }

  std::vector<nn::TrainExample> train_set, val_set, test_set;
  std::vector<ClassLabel> test_truths;
  for (size_t i = 0; i < records.size(); ++i) {
    switch (records[i].split) {
      case Split::train: train_set.push_back(std::move(examples[i])); break;
      case Split::val: val_set.push_back(std::move(examples[i])); break;
      case Split::test:
        test_set.push_back(std::move(examples[i]));
        test_truths.push_back(records[i].label);
        break;
      case Split::unassigned:
        throw SplitError("pipeline: unassigned record after split: " +
                         records[i].path);
    }
  }
  if (train_set.empty()) throw SplitError("pipeline: empty train split");
  if (test_set.empty()) throw SplitError("pipeline: empty test split");

  PipelineResult result;
  result.fingerprint = fingerprint;
  result.n_test = test_set.size();

  // train
  const size_t channels = train_set[0].features.shape[0];
  const size_t length = train_set[0].features.shape[1];
  nn::ModelHyper hyper;
  hyper.dropout_p = config.dropout;
  nn::Model model =
      nn::build_model(channels, length, hyper, config.effective_nn_seed());

  nn::TrainConfig tc;
  tc.epochs = config.epochs;
  tc.batch_size = config.batch_size;
  tc.base_lr = config.base_lr;
  tc.min_lr = config.min_lr;
  tc.plateau_patience = config.plateau_patience;
  tc.plateau_factor = config.plateau_factor;
  tc.dropout_p = config.dropout;
  tc.seed = config.effective_nn_seed();
  tc.validation_fraction = config.val_fraction;

  {
    StageTimer timer(log, "train");
    if (val_set.empty()) {
      result.train_report = nn::train(model, std::move(train_set), tc);
    } else {
      result.n_val = val_set.size();
      result.train_report =
          nn::train(model, std::move(train_set), std::move(val_set), tc);
    }
    char buf[96];
    for (size_t e = 0; e < result.train_report.train_loss.size(); ++e) {
      std::snprintf(buf, sizeof buf,
                    "  epoch %2zu  train %.4f  val %.4f  lr %.2g\n", e + 1,
                    result.train_report.train_loss[e],
                    result.train_report.val_loss[e],
                    result.train_report.learning_rate[e]);
      log << buf;
    }
  }

  {
    std::ofstream history((fs::path(config.out_dir) / "history.csv").string(),
                          std::ios::trunc);
    if (!history) throw IoError("cannot write history.csv");
    history << "# config_fingerprint," << fingerprint << "\n";
    history << "epoch,train_loss,val_loss,learning_rate\n";
    char buf[128];
    for (size_t e = 0; e < result.train_report.train_loss.size(); ++e) {
      std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g,%.12g\n", e + 1,
                    result.train_report.train_loss[e],
                    result.train_report.val_loss[e],
                    result.train_report.learning_rate[e]);
      history << buf;
    }
  }

  result.checkpoint_path =
      (fs::path(config.out_dir) / "checkpoint.avcm").string();
  nn::save_checkpoint(model, result.checkpoint_path, fingerprint,
                      to_string(config.feature));

  // evaluate
  {
    StageTimer timer(log, "evaluate");
    std::vector<ClassLabel> predictions;
    predictions.reserve(test_set.size());
    Rng rng(0);
    for (const auto& ex : test_set) {
      const nn::Tensor probs = model.forward(ex.features, false, rng);
      const size_t arg = static_cast<size_t>(
          std::max_element(probs.data.begin(), probs.data.end()) -
          probs.data.begin());
      predictions.push_back(static_cast<ClassLabel>(arg));
    }
    result.report = metrics(confusion(predictions, test_truths));
    result.report.feature = config.feature;
    result.report.fingerprint = fingerprint;
  }

  {
    std::ofstream metrics_csv((fs::path(config.out_dir) / "metrics.csv").string(),
                              std::ios::trunc);
    write_metrics_csv(metrics_csv, result.report, fingerprint);
    std::ofstream confusion_csv(
        (fs::path(config.out_dir) / "confusion.csv").string(), std::ios::trunc);
    write_confusion_csv(confusion_csv, result.report.confusion, fingerprint);
  }

  const std::string fixture = std::string("table6_") + to_string(config.feature);
  const Comparison cmp = render_comparison(result.report, fixture);
  write_file((fs::path(config.out_dir) / ("comparison_" + fixture + ".csv")).string(),
             "# config_fingerprint," + fingerprint + "\n" + cmp.csv);
  write_file((fs::path(config.out_dir) / "comparison.txt").string(),
             cmp.text + "config_fingerprint " + fingerprint + "\n");

  log << render_metrics_text(result.report);
  log << cmp.text;

  result.n_train = records.size() - result.n_test - result.n_val;
  return result;
}

}  // namespace avc
