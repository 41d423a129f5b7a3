// avc: acoustic vehicle classification toolkit.
//
// Subcommands mirror the pipeline stages: ingest, quality, augment, features,
// train, evaluate, pipeline, inspect. Exit codes: 0 success, 1 internal
// error, 2 invalid input or configuration.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "avc/augment.hpp"
#include "avc/clip_store.hpp"
#include "avc/config.hpp"
#include "avc/csv.hpp"
#include "avc/errors.hpp"
#include "avc/eval.hpp"
#include "avc/pipeline.hpp"
#include "avc/util.hpp"

namespace fs = std::filesystem;
using namespace avc;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 0;
};

RunConfig resolve_config(const GlobalOpts& g) {
  RunConfig cfg;
  if (!g.config_path.empty()) cfg = RunConfig::from_file(g.config_path);
  for (const auto& kv : g.overrides) cfg.apply_override(kv);
  if (g.seed_set) cfg.seed = g.seed;
  if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
  if (g.jobs > 0) cfg.jobs = g.jobs;
  return cfg;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

int cmd_ingest(const GlobalOpts& g, const std::string& manifest) {
  RunConfig cfg = resolve_config(g);
  if (!manifest.empty()) cfg.manifest = manifest;
  require(!cfg.manifest.empty(), "ingest: --manifest required");
  require(!cfg.out_dir.empty(), "ingest: --out required");
  fs::create_directories(cfg.out_dir);

  IngestStats stats = ingest_manifest(cfg.manifest, cfg.out_dir, cfg.jobs,
                                      22050, 2.0, cfg.fingerprint());
  if (!stats.errors.empty()) {
    std::cerr << "ingest: " << stats.errors.size() << " file(s) failed:\n";
    for (const auto& e : stats.errors) std::cerr << "  " << e << "\n";
    return 2;
  }
  std::map<ClassLabel, size_t> counts;
  for (const auto& rec : stats.records) counts[rec.label]++;
  std::cout << "ingested " << stats.records.size() << " clips (decoded="
            << stats.decoded << " cache_hits=" << stats.cache_hits << ")\n";
  for (const auto& [label, n] : counts) {
    std::cout << "  " << to_string(label) << ": " << n << "\n";
  }
  std::cout << "normalized manifest: "
            << (fs::path(cfg.out_dir) / "normalized_manifest.csv").string()
            << "\n";
  return 0;
}

int cmd_quality(const GlobalOpts& g, const std::string& manifest,
                const std::string& target_class) {
  RunConfig cfg = resolve_config(g);
  if (!manifest.empty()) cfg.manifest = manifest;
  if (!target_class.empty()) {
    cfg.quality_class = class_label_from_string(target_class);
  }
  require(!cfg.manifest.empty(), "quality: --manifest required");
  require(!cfg.out_dir.empty(), "quality: --out required");
  fs::create_directories(cfg.out_dir);

  const auto records = load_manifest(cfg.manifest);
  QualityStage stage = run_quality_stage(
      records, cfg.quality_class, cfg.effective_quality_seed(),
      file_clip_loader(), cfg.out_dir, cfg.fingerprint());

  const size_t kept_target =
      stage.filter.target_indices.size() - stage.filter.rejected.size();
  std::cout << "quality gate on class " << to_string(cfg.quality_class) << ": "
            << stage.filter.target_indices.size() << " clips -> kept "
            << kept_target << ", rejected " << stage.filter.rejected.size()
            << "\n";
  std::map<int, size_t> cluster_sizes;
  for (const int c : stage.filter.target_cluster) cluster_sizes[c]++;
  for (const auto& [c, n] : cluster_sizes) {
    std::cout << "  cluster " << c << ": " << n << " clips\n";
  }
  std::cout << "kept manifest: "
            << (fs::path(cfg.out_dir) / "kept_manifest.csv").string() << "\n";
  return 0;
}

int cmd_augment(const GlobalOpts& g, const std::string& manifest,
                const std::string& classes, bool beside_originals) {
  RunConfig cfg = resolve_config(g);
  if (!manifest.empty()) cfg.manifest = manifest;
  if (!classes.empty()) {
    cfg.augment_classes.clear();
    std::istringstream ss(classes);
    std::string part;
    while (std::getline(ss, part, ',')) {
      cfg.augment_classes.insert(class_label_from_string(part));
    }
  }
  require(!cfg.manifest.empty(), "augment: --manifest required");
  require(!cfg.out_dir.empty(), "augment: --out required");
  fs::create_directories(cfg.out_dir);

  StretchSpec spec;
  spec.factors = cfg.stretch_factors;
  spec.keep_original = cfg.keep_original;

  const auto records = load_manifest(cfg.manifest);
  // stretched copies land beside their sources by default
  const std::string save_dir =
      beside_originals ? "" : (fs::path(cfg.out_dir) / "augmented").string();
  const auto out_records = run_augment_stage(
      records, spec, cfg.augment_classes, file_clip_loader(), save_dir);
  save_manifest((fs::path(cfg.out_dir) / "augmented_manifest.csv").string(),
                out_records, "", cfg.fingerprint());
  std::cout << "augmented " << records.size() << " -> " << out_records.size()
            << " records\naugmented manifest: "
            << (fs::path(cfg.out_dir) / "augmented_manifest.csv").string()
            << "\n";
  return 0;
}

int cmd_features(const GlobalOpts& g, const std::string& manifest,
                 const std::string& kind_name) {
  RunConfig cfg = resolve_config(g);
  if (!manifest.empty()) cfg.manifest = manifest;
  if (!kind_name.empty()) cfg.feature = feature_kind_from_string(kind_name);
  require(!cfg.manifest.empty(), "features: --manifest required");
  require(!cfg.out_dir.empty(), "features: --out required");
  const fs::path feat_dir = fs::path(cfg.out_dir) / "features";
  fs::create_directories(feat_dir);

  const auto records = load_manifest(cfg.manifest);
  const ClipLoader load = file_clip_loader();
  std::vector<std::string> outputs(records.size());
  parallel_for(records.size(), cfg.jobs, [&](size_t i) {
    const MonoClip clip = load(records[i]);
    FeatureMatrix fm;
    switch (cfg.feature) {
      case FeatureKind::mel: fm = mel_spectrogram(clip); break;
      case FeatureKind::mfcc: fm = mfcc(clip); break;
      case FeatureKind::gfcc: fm = gfcc(clip); break;
    }
    const std::string stem = fs::path(records[i].path).stem().string();
    const fs::path out = feat_dir / (stem + "_" + to_string(cfg.feature) + ".csv");
    std::ofstream f(out, std::ios::trunc);
    if (!f) throw IoError("cannot write " + out.string());
    write_feature_csv(f, fm);
    outputs[i] = out.string();
  });

  std::ofstream index((fs::path(cfg.out_dir) / "features_index.csv").string(),
                      std::ios::trunc);
  index << "# config_fingerprint," << cfg.fingerprint() << "\n";
  index << "feature_csv,path,label,kind\n";
  for (size_t i = 0; i < records.size(); ++i) {
    index << csv_escape(outputs[i]) << ',' << csv_escape(records[i].path) << ','
          << to_string(records[i].label) << ',' << to_string(cfg.feature)
          << "\n";
  }
  std::cout << "extracted " << records.size() << " " << to_string(cfg.feature)
            << " matrices into " << feat_dir.string() << "\n";
  return 0;
}

int cmd_train(const GlobalOpts& g, const std::string& manifest,
              const std::string& kind_name) {
  RunConfig cfg = resolve_config(g);
  if (!manifest.empty()) cfg.manifest = manifest;
  if (!kind_name.empty()) cfg.feature = feature_kind_from_string(kind_name);
  require(!cfg.manifest.empty(), "train: --manifest required");
  require(!cfg.out_dir.empty(), "train: --out required");
  fs::create_directories(cfg.out_dir);

  const auto records = load_manifest(cfg.manifest);
  std::vector<SampleRecord> train_recs, val_recs;
  for (const auto& rec : records) {
    if (rec.split == Split::train) train_recs.push_back(rec);
    if (rec.split == Split::val) val_recs.push_back(rec);
  }
  require(!train_recs.empty(),
          "train: manifest has no records with split == train");

  const ClipLoader load = file_clip_loader();
  auto train_ex = extract_features(train_recs, cfg.feature, cfg.jobs, load);
  auto val_ex = extract_features(val_recs, cfg.feature, cfg.jobs, load);

  const size_t channels = train_ex[0].features.shape[0];
  const size_t length = train_ex[0].features.shape[1];
  nn::ModelHyper hyper;
  hyper.dropout_p = cfg.dropout;
  nn::Model model =
      nn::build_model(channels, length, hyper, cfg.effective_nn_seed());

  nn::TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.base_lr = cfg.base_lr;
  tc.min_lr = cfg.min_lr;
  tc.plateau_patience = cfg.plateau_patience;
  tc.plateau_factor = cfg.plateau_factor;
  tc.dropout_p = cfg.dropout;
  tc.seed = cfg.effective_nn_seed();
  tc.validation_fraction = cfg.val_fraction;

  nn::TrainReport report =
      val_ex.empty() ? nn::train(model, std::move(train_ex), tc)
                     : nn::train(model, std::move(train_ex), std::move(val_ex), tc);

  const std::string fingerprint = cfg.fingerprint();
  std::ofstream history((fs::path(cfg.out_dir) / "history.csv").string(),
                        std::ios::trunc);
  history << "# config_fingerprint," << fingerprint << "\n";
  history << "epoch,train_loss,val_loss,learning_rate\n";
  char buf[128];
  for (size_t e = 0; e < report.train_loss.size(); ++e) {
    std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g,%.12g\n", e + 1,
                  report.train_loss[e], report.val_loss[e],
                  report.learning_rate[e]);
    history << buf;
  }
  const std::string ckpt = (fs::path(cfg.out_dir) / "checkpoint.avcm").string();
  nn::save_checkpoint(model, ckpt, fingerprint, to_string(cfg.feature));
  std::cout << "trained " << report.train_loss.size() << " epochs in "
            << report.wall_seconds << "s\ncheckpoint: " << ckpt << "\n";
  return 0;
}

int cmd_evaluate(const GlobalOpts& g, const std::string& manifest,
                 const std::string& checkpoint, const std::string& baseline,
                 bool allow_synthetic) {
  RunConfig cfg = resolve_config(g);
  if (!manifest.empty()) cfg.manifest = manifest;
  require(!cfg.manifest.empty(), "evaluate: --manifest required");
  require(!checkpoint.empty(), "evaluate: --checkpoint required");
  require(!cfg.out_dir.empty(), "evaluate: --out required");
  fs::create_directories(cfg.out_dir);

  std::string fingerprint, feature_name;
  nn::Model model = nn::load_checkpoint(checkpoint, &fingerprint, &feature_name);
  const FeatureKind kind = feature_name.empty()
                               ? cfg.feature
                               : feature_kind_from_string(feature_name);

  const auto records = load_manifest(cfg.manifest);
  std::vector<SampleRecord> test_recs;
  for (const auto& rec : records) {
    if (rec.split == Split::test) test_recs.push_back(rec);
  }
  require(!test_recs.empty(),
          "evaluate: manifest has no records with split == test");
  for (const auto& rec : test_recs) {
    if (rec.synthetic && !allow_synthetic) {
      throw SplitError(
          "evaluate: synthetic record in test split (" + rec.path +
          "); pass --allow-synthetic-test to permit this");
    }
  }

  const auto test_ex =
      extract_features(test_recs, kind, cfg.jobs, file_clip_loader());
  std::vector<ClassLabel> predictions, truths;
  Rng rng(0);
  for (size_t i = 0; i < test_ex.size(); ++i) {
    const nn::Tensor probs = model.forward(test_ex[i].features, false, rng);
    predictions.push_back(static_cast<ClassLabel>(
        std::max_element(probs.data.begin(), probs.data.end()) -
        probs.data.begin()));
    truths.push_back(test_recs[i].label);
  }
  EvalReport report = metrics(confusion(predictions, truths));
  report.feature = kind;
  report.fingerprint = fingerprint;

  std::ofstream metrics_csv((fs::path(cfg.out_dir) / "metrics.csv").string(),
                            std::ios::trunc);
  write_metrics_csv(metrics_csv, report, fingerprint);
  std::ofstream confusion_csv(
      (fs::path(cfg.out_dir) / "confusion.csv").string(), std::ios::trunc);
  write_confusion_csv(confusion_csv, report.confusion, fingerprint);
  std::cout << render_metrics_text(report);
  if (!baseline.empty()) {
    const Comparison cmp = render_comparison(report, baseline);
    write_file((fs::path(cfg.out_dir) / ("comparison_" + baseline + ".csv")).string(),
               cmp.csv);
    std::cout << cmp.text;
  }
  return 0;
}

int cmd_pipeline(const GlobalOpts& g, const std::string& manifest) {
  RunConfig cfg = resolve_config(g);
  if (!manifest.empty()) cfg.manifest = manifest;
  require(!cfg.manifest.empty(), "pipeline: --manifest or config required");
  require(!cfg.out_dir.empty(), "pipeline: --out or config required");
  const PipelineResult result = run_pipeline(cfg, std::cout);
  std::cout << "pipeline complete; artifacts in " << cfg.out_dir << "\n";
  (void)result;
  return 0;
}

int cmd_inspect(const GlobalOpts& g, const std::string& input,
                const std::string& what, const std::string& format, bool raw) {
  RunConfig cfg = resolve_config(g);
  require(!input.empty(), "inspect: --input required");
  require(!cfg.out_dir.empty(), "inspect: --out required");
  fs::create_directories(cfg.out_dir);
  const std::string stem = fs::path(input).stem().string();

  // feature CSVs can be re-rendered as PGM directly
  if (fs::path(input).extension() == ".csv") {
    std::ifstream in(input);
    if (!in) throw IoError("cannot open " + input);
    const FeatureMatrix fm = read_feature_csv(in, FeatureKind::mel);
    const fs::path out = fs::path(cfg.out_dir) / (stem + ".pgm");
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    write_feature_pgm(f, fm);
    std::cout << out.string() << "\n";
    return 0;
  }

  MonoClip clip = downmix(decode_wav_file(input));
  if (!raw) {
    clip = fix_duration(resample(clip, 22050), 2.0);
  }

  const fs::path out_base = fs::path(cfg.out_dir) / (stem + "_" + what);
  if (what == "rmse") {
    const RmseVector v = frame_rmse(clip);
    std::ofstream f(out_base.string() + ".csv", std::ios::trunc);
    f << "frame,rmse\n";
    char buf[48];
    for (size_t t = 0; t < v.values.size(); ++t) {
      std::snprintf(buf, sizeof buf, "%zu,%.9g\n", t, v.values[t]);
      f << buf;
    }
    std::cout << out_base.string() + ".csv" << "\n";
    return 0;
  }
  if (what == "spectrum") {
    const auto mag = magnitude_spectrum(clip);
    std::ofstream f(out_base.string() + ".csv", std::ios::trunc);
    f << "bin,freq_hz,magnitude\n";
    const double hz_per_bin = static_cast<double>(clip.sample_rate) /
                              static_cast<double>(clip.samples.size());
    char buf[64];
    for (size_t b = 0; b < mag.size(); ++b) {
      std::snprintf(buf, sizeof buf, "%zu,%.6f,%.9g\n", b,
                    hz_per_bin * static_cast<double>(b), mag[b]);
      f << buf;
    }
    std::cout << out_base.string() + ".csv" << "\n";
    return 0;
  }

  const FeatureKind kind = feature_kind_from_string(what);
  FeatureMatrix fm;
  switch (kind) {
    case FeatureKind::mel: fm = mel_spectrogram(clip); break;
    case FeatureKind::mfcc: fm = mfcc(clip); break;
    case FeatureKind::gfcc: fm = gfcc(clip); break;
  }
  if (format == "pgm") {
    std::ofstream f(out_base.string() + ".pgm",
                    std::ios::binary | std::ios::trunc);
    write_feature_pgm(f, fm);
    std::cout << out_base.string() + ".pgm" << "\n";
  } else {
    std::ofstream f(out_base.string() + ".csv", std::ios::trunc);
    write_feature_csv(f, fm);
    std::cout << out_base.string() + ".csv" << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acoustic vehicle classification toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalOpts g;
  app.add_option("--config", g.config_path, "flat key = value config file");
  app.add_option("--set", g.overrides, "config override key=value (repeatable)");
  app.add_option("--out", g.out_dir, "output directory");
  app.add_option("--seed", g.seed, "master seed")->each([&](const std::string&) {
    g.seed_set = true;
  });
  app.add_option("--jobs", g.jobs, "worker threads (0 = hardware)");

  std::string manifest, target_class, kind, checkpoint, baseline;
  std::string input, what = "mel", format = "csv", classes;
  bool allow_synthetic = false, beside_originals = false, raw = false;

  auto* ingest = app.add_subcommand("ingest", "decode and normalize clips");
  ingest->add_option("--manifest", manifest, "input manifest CSV");

  auto* quality = app.add_subcommand("quality", "RMSE clustering rejection");
  quality->add_option("--manifest", manifest, "normalized manifest CSV");
  quality->add_option("--class", target_class, "class to gate (default truck)");

  auto* augment = app.add_subcommand("augment", "time-stretch augmentation");
  augment->add_option("--manifest", manifest, "input manifest CSV");
  augment->add_option("--classes", classes, "classes to stretch");
  augment->add_flag("--beside-originals", beside_originals,
                    "write stretched WAVs next to their sources");

  auto* features = app.add_subcommand("features", "extract feature CSVs");
  features->add_option("--manifest", manifest, "input manifest CSV");
  features->add_option("--kind", kind, "mel | mfcc | gfcc");

  auto* train = app.add_subcommand("train", "train the CNN");
  train->add_option("--manifest", manifest, "split manifest CSV");
  train->add_option("--kind", kind, "mel | mfcc | gfcc");

  auto* evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint");
  evaluate->add_option("--manifest", manifest, "split manifest CSV");
  evaluate->add_option("--checkpoint", checkpoint, "model checkpoint");
  evaluate->add_option("--baseline", baseline, "comparison fixture name");
  evaluate->add_flag("--allow-synthetic-test", allow_synthetic,
                     "permit synthetic records in the test split");

  auto* pipeline = app.add_subcommand("pipeline", "run the full experiment");
  pipeline->add_option("--manifest", manifest, "input manifest CSV");

  auto* inspect = app.add_subcommand("inspect", "emit plots/CSVs for one clip");
  inspect->add_option("--input", input, "WAV clip or feature CSV");
  inspect->add_option("--what", what, "mel | mfcc | gfcc | rmse | spectrum");
  inspect->add_option("--format", format, "csv | pgm");
  inspect->add_flag("--raw", raw, "skip resample/duration normalization");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) return cmd_ingest(g, manifest);
    if (quality->parsed()) return cmd_quality(g, manifest, target_class);
    if (augment->parsed()) return cmd_augment(g, manifest, classes, beside_originals);
    if (features->parsed()) return cmd_features(g, manifest, kind);
    if (train->parsed()) return cmd_train(g, manifest, kind);
    if (evaluate->parsed()) {
      return cmd_evaluate(g, manifest, checkpoint, baseline, allow_synthetic);
    }
    if (pipeline->parsed()) return cmd_pipeline(g, manifest);
    if (inspect->parsed()) return cmd_inspect(g, input, what, format, raw);
  } catch (const DecodeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const UnsupportedFormat& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ManifestError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SplitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SubsampleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
