#include "avc/eval.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "avc/errors.hpp"

namespace avc {

int64_t ConfusionMatrix::total() const {
  int64_t n = 0;
  for (const auto& row : counts) {
    for (const int64_t c : row) n += c;
  }
  return n;
}

int64_t ConfusionMatrix::trace() const {
  int64_t n = 0;
  for (size_t i = 0; i < 4; ++i) n += counts[i][i];
  return n;
}

ConfusionMatrix confusion(std::span<const ClassLabel> predictions,
                          std::span<const ClassLabel> truths) {
  if (predictions.size() != truths.size()) {
    throw InvalidArgument("confusion: predictions and truths differ in length");
  }
  if (predictions.empty()) {
    throw InvalidArgument("confusion: empty input");
  }
  ConfusionMatrix cm;
  for (size_t i = 0; i < predictions.size(); ++i) {
    cm.counts[static_cast<size_t>(truths[i])]
             [static_cast<size_t>(predictions[i])]++;
  }
  return cm;
}

EvalReport metrics(const ConfusionMatrix& cm) {
  const int64_t total = cm.total();
  if (total <= 0) throw InvalidArgument("metrics: empty confusion matrix");

  EvalReport report;
  report.confusion = cm;
  for (size_t k = 0; k < 4; ++k) {
    int64_t tp = cm.counts[k][k], fp = 0, fn = 0;
    for (size_t j = 0; j < 4; ++j) {
      if (j == k) continue;
      fp += cm.counts[j][k];
      fn += cm.counts[k][j];
    }
    ClassMetrics& m = report.per_class[k];
    m.support = tp + fn;
    m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = m.precision + m.recall > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
  }
  report.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
  return report;
}

std::array<std::array<double, 4>, 4> confusion_row_percent(
    const ConfusionMatrix& cm) {
  std::array<std::array<double, 4>, 4> out{};
  for (size_t i = 0; i < 4; ++i) {
    int64_t row = 0;
    for (const int64_t c : cm.counts[i]) row += c;
    for (size_t j = 0; j < 4; ++j) {
      out[i][j] = row > 0 ? 100.0 * static_cast<double>(cm.counts[i][j]) /
                                static_cast<double>(row)
                          : 0.0;
    }
  }
  return out;
}

namespace {

std::vector<BaselineFixture> make_fixtures();

const std::vector<BaselineFixture>& fixtures() {
  static const std::vector<BaselineFixture> all = make_fixtures();
  return all;
}

std::vector<BaselineFixture> make_fixtures() {
  std::vector<BaselineFixture> all;
  // class order everywhere: (car, truck, motorcycle, none)
  {
    BaselineFixture f;
    f.name = "table1_baseline";  // published VGG-style baseline
    f.f1 = {0.94, 0.50, 0.96, 1.00};
    all.push_back(f);
  }
  {
    BaselineFixture f;
    f.name = "table1_replicated";  // independent replication of the baseline
    f.f1 = {0.94, 0.35, 0.95, 1.00};
    all.push_back(f);
  }
  {
    BaselineFixture f;
    f.name = "table6_mfcc";  // cleaned-data run, MFCC features
    f.precision = {{0.99, 0.95, 1.00, 0.99}};
    f.recall = {{0.99, 0.89, 0.97, 1.00}};
    f.f1 = {0.99, 0.92, 0.99, 1.00};
    f.accuracy = 0.9895;
    all.push_back(f);
  }
  {
    BaselineFixture f;
    f.name = "table6_gfcc";
    f.precision = {{0.98, 0.97, 0.97, 1.00}};
    f.recall = {{1.00, 0.84, 0.99, 0.99}};
    f.f1 = {0.99, 0.90, 0.98, 0.99};
    f.accuracy = 0.9894;
    all.push_back(f);
  }
  {
    BaselineFixture f;
    f.name = "table6_mel";
    f.precision = {{0.98, 0.86, 0.89, 1.00}};
    f.recall = {{0.99, 0.83, 0.96, 0.99}};
    f.f1 = {0.98, 0.84, 0.93, 0.99};
    f.accuracy = 0.9808;
    all.push_back(f);
  }
  {
    BaselineFixture f;
    f.name = "table7_ours";  // cleaned-data MFCC per-class F1 summary row
    f.f1 = {0.99, 0.92, 0.99, 1.00};
    all.push_back(f);
  }
  return all;
}

void append_csv_value(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  out += buf;
}

}  // namespace

const BaselineFixture& baseline_fixture(const std::string& name) {
  for (const auto& f : fixtures()) {
    if (f.name == name) return f;
  }
  throw InvalidArgument("unknown baseline fixture '" + name + "'");
}

std::vector<std::string> baseline_fixture_names() {
  std::vector<std::string> names;
  for (const auto& f : fixtures()) names.push_back(f.name);
  return names;
}

Comparison render_comparison(const EvalReport& report,
                             const std::string& baseline_name) {
  const BaselineFixture& base = baseline_fixture(baseline_name);

  Comparison cmp;
  char line[128];
  cmp.text += "class        f1_ours  f1_" + baseline_name + "  delta\n";
  cmp.csv = "class,f1_ours,f1_baseline,delta\n";
  for (size_t k = 0; k < 4; ++k) {
    const double ours = report.per_class[k].f1;
    const double theirs = base.f1[k];
    std::snprintf(line, sizeof line, "%-12s %7.2f  %*.2f  %+.2f\n",
                  to_string(static_cast<ClassLabel>(k)), ours,
                  static_cast<int>(baseline_name.size()) + 3, theirs,
                  ours - theirs);
    cmp.text += line;
    cmp.csv += to_string(static_cast<ClassLabel>(k));
    cmp.csv += ',';
    append_csv_value(cmp.csv, ours);
    cmp.csv += ',';
    append_csv_value(cmp.csv, theirs);
    cmp.csv += ',';
    append_csv_value(cmp.csv, ours - theirs);
    cmp.csv += '\n';
  }
  if (base.accuracy) {
    std::snprintf(line, sizeof line, "accuracy     %7.2f  %*.2f  %+.2f\n",
                  report.accuracy, static_cast<int>(baseline_name.size()) + 3,
                  *base.accuracy, report.accuracy - *base.accuracy);
    cmp.text += line;
    cmp.csv += "accuracy,";
    append_csv_value(cmp.csv, report.accuracy);
    cmp.csv += ',';
    append_csv_value(cmp.csv, *base.accuracy);
    cmp.csv += ',';
    append_csv_value(cmp.csv, report.accuracy - *base.accuracy);
    cmp.csv += '\n';
  }
  return cmp;
}

void write_metrics_csv(std::ostream& out, const EvalReport& report,
                       const std::string& fingerprint) {
  if (!fingerprint.empty()) out << "# config_fingerprint," << fingerprint << "\n";
  out << "class,precision,recall,f1,support\n";
  char buf[128];
  for (size_t k = 0; k < 4; ++k) {
    const auto& m = report.per_class[k];
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%lld\n",
                  to_string(static_cast<ClassLabel>(k)), m.precision, m.recall,
                  m.f1, static_cast<long long>(m.support));
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "accuracy,%.6f,,,\n", report.accuracy);
  out << buf;
}

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm,
                         const std::string& fingerprint) {
  if (!fingerprint.empty()) out << "# config_fingerprint," << fingerprint << "\n";
  out << "class,car,truck,motorcycle,none\n";
  for (size_t i = 0; i < 4; ++i) {
    out << to_string(static_cast<ClassLabel>(i));
    for (size_t j = 0; j < 4; ++j) out << ',' << cm.counts[i][j];
    out << "\n";
  }
}

std::string render_metrics_text(const EvalReport& report) {
  std::string text = "class        precision  recall    f1  support\n";
  char line[128];
  for (size_t k = 0; k < 4; ++k) {
    const auto& m = report.per_class[k];
    std::snprintf(line, sizeof line, "%-12s %9.2f %7.2f %5.2f %8lld\n",
                  to_string(static_cast<ClassLabel>(k)), m.precision, m.recall,
                  m.f1, static_cast<long long>(m.support));
    text += line;
  }
  std::snprintf(line, sizeof line, "accuracy %.2f%%\n", 100.0 * report.accuracy);
  text += line;
  return text;
}

}  // namespace avc
