#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "avc/dataset.hpp"
#include "avc/features.hpp"

namespace avc {

// Rows = true class, cols = predicted class, order (car, truck, motorcycle,
// none).
struct ConfusionMatrix {
  std::array<std::array<int64_t, 4>, 4> counts{};

  int64_t total() const;
  int64_t trace() const;
};

ConfusionMatrix confusion(std::span<const ClassLabel> predictions,
                          std::span<const ClassLabel> truths);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int64_t support = 0;
};

struct EvalReport {
  ConfusionMatrix confusion;
  std::array<ClassMetrics, 4> per_class;
  double accuracy = 0.0;
  FeatureKind feature = FeatureKind::mfcc;
  std::string fingerprint;
};

// Per-class precision/recall/F1 and accuracy; zero denominators yield 0.
EvalReport metrics(const ConfusionMatrix& cm);

// Row-normalized percentages (the human-study table rendering).
std::array<std::array<double, 4>, 4> confusion_row_percent(
    const ConfusionMatrix& cm);

// Published per-class F1 rows shipped as versioned fixtures.
struct BaselineFixture {
  std::string name;
  std::array<double, 4> f1{};  // (car, truck, motorcycle, none)
  std::optional<std::array<double, 4>> precision;
  std::optional<std::array<double, 4>> recall;
  std::optional<double> accuracy;  // fraction in [0, 1]
};

const BaselineFixture& baseline_fixture(const std::string& name);
std::vector<std::string> baseline_fixture_names();

struct Comparison {
  std::string text;  // fixed-width table
  std::string csv;   // machine-readable twin
};

// Side-by-side per-class F1 against a named fixture, with deltas.
Comparison render_comparison(const EvalReport& report,
                             const std::string& baseline_name);

void write_metrics_csv(std::ostream& out, const EvalReport& report,
                       const std::string& fingerprint = "");
void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm,
                         const std::string& fingerprint = "");
std::string render_metrics_text(const EvalReport& report);

}  // namespace avc
