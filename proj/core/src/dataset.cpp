#include "avc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "avc/csv.hpp"
#include "avc/errors.hpp"
#include "avc/rng.hpp"

namespace fs = std::filesystem;

namespace avc {

const char* to_string(ClassLabel label) {
  switch (label) {
    case ClassLabel::car: return "car";
    case ClassLabel::truck: return "truck";
    case ClassLabel::motorcycle: return "motorcycle";
    case ClassLabel::none: return "none";
  }
  return "?";
}

ClassLabel class_label_from_string(const std::string& name) {
  if (name == "car") return ClassLabel::car;
  if (name == "truck") return ClassLabel::truck;
  if (name == "motorcycle") return ClassLabel::motorcycle;
  if (name == "none") return ClassLabel::none;
  if (name == "bus") {
    throw InvalidArgument("unknown label 'bus' (bus class is out of scope)");
  }
  throw InvalidArgument("unknown label '" + name + "'");
}

const char* to_string(Mic mic) {
  switch (mic) {
    case Mic::se: return "SE";
    case Mic::me: return "ME";
    case Mic::unknown: return "";
  }
  return "";
}

const char* to_string(Road road) {
  switch (road) {
    case Road::dry: return "dry";
    case Road::wet: return "wet";
    case Road::unknown: return "";
  }
  return "";
}

const char* to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    case Split::unassigned: return "";
  }
  return "";
}

namespace {

Mic mic_from_string(const std::string& s) {
  if (s.empty()) return Mic::unknown;
  if (s == "SE" || s == "se") return Mic::se;
  if (s == "ME" || s == "me") return Mic::me;
  throw InvalidArgument("unknown mic '" + s + "'");
}

Road road_from_string(const std::string& s) {
  if (s.empty()) return Road::unknown;
  if (s == "dry") return Road::dry;
  if (s == "wet") return Road::wet;
  throw InvalidArgument("unknown road condition '" + s + "'");
}

Split split_from_string(const std::string& s) {
  if (s.empty() || s == "unassigned") return Split::unassigned;
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw InvalidArgument("unknown split '" + s + "'");
}

int speed_from_string(const std::string& s) {
  if (s.empty()) return 0;
  int v = 0;
  try {
    size_t pos = 0;
    v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
  } catch (const std::exception&) {
    throw InvalidArgument("bad speed_kmh '" + s + "'");
  }
  if (v != 30 && v != 50 && v != 70) {
    throw InvalidArgument("speed_kmh must be 30, 50 or 70 (got '" + s + "')");
  }
  return v;
}

bool truthy(const std::string& s) {
  return s == "1" || s == "true" || s == "yes";
}

// Per-class count grouping preserving first-seen order of indices.
std::map<ClassLabel, std::vector<size_t>> by_class(
    const std::vector<SampleRecord>& records) {
  std::map<ClassLabel, std::vector<size_t>> groups;
  for (size_t i = 0; i < records.size(); ++i) {
    groups[records[i].label].push_back(i);
  }
  return groups;
}

}  // namespace

std::vector<SampleRecord> load_manifest(const std::string& path,
                                        bool verify_files) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path);
  const CsvTable table = read_csv(in, path);

  const int col_path = table.column("path");
  const int col_label = table.column("label");
  if (col_path < 0 || col_label < 0) {
    throw ManifestError(path + ": header must contain path,label columns");
  }
  const int col_speed = table.column("speed_kmh");
  const int col_mic = table.column("mic");
  const int col_road = table.column("road");
  const int col_synth = table.column("synthetic");
  const int col_split = table.column("split");

  const fs::path base = fs::path(path).parent_path();
  std::vector<SampleRecord> records;
  records.reserve(table.rows.size());
  std::vector<std::string> errors;

  auto cell = [&](const std::vector<std::string>& row, int col) -> std::string {
    if (col < 0 || static_cast<size_t>(col) >= row.size()) return "";
    return row[static_cast<size_t>(col)];
  };

  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = "row " + std::to_string(r + 1);
    try {
      SampleRecord rec;
      const std::string raw_path = cell(row, col_path);
      if (raw_path.empty()) throw InvalidArgument("empty path");
      fs::path p(raw_path);
      rec.path = p.is_absolute() ? p.string() : (base / p).string();
      rec.label = class_label_from_string(cell(row, col_label));
      rec.speed_kmh = speed_from_string(cell(row, col_speed));
      rec.mic = mic_from_string(cell(row, col_mic));
      rec.road = road_from_string(cell(row, col_road));
      rec.synthetic = truthy(cell(row, col_synth));
      rec.split = split_from_string(cell(row, col_split));
      if (verify_files && !fs::exists(rec.path)) {
        throw InvalidArgument("referenced file not found: " + rec.path);
      }
      records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      errors.push_back(where + ": " + e.what());
    }
  }

  if (!errors.empty()) {
    std::ostringstream msg;
    msg << path << ": " << errors.size() << " bad row(s)";
    for (const auto& e : errors) msg << "\n  " << e;
    throw ManifestError(msg.str());
  }
  return records;
}

void save_manifest(const std::string& path,
                   const std::vector<SampleRecord>& records,
                   const std::string& base_dir, const std::string& fingerprint) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest: " + path);
  if (!fingerprint.empty()) out << "# config_fingerprint," << fingerprint << "\n";
  out << "path,label,speed_kmh,mic,road,synthetic,split\n";
  for (const auto& rec : records) {
    std::string p = rec.path;
    if (!base_dir.empty()) {
      const auto rel = fs::path(p).lexically_relative(base_dir);
      if (!rel.empty() && rel.native()[0] != '.') p = rel.string();
    }
    out << csv_escape(p) << ',' << to_string(rec.label) << ','
        << (rec.speed_kmh ? std::to_string(rec.speed_kmh) : "") << ','
        << to_string(rec.mic) << ',' << to_string(rec.road) << ','
        << (rec.synthetic ? "1" : "0") << ',' << to_string(rec.split) << "\n";
  }
  if (!out) throw IoError("short write: " + path);
}

std::vector<SampleRecord> split_by_speed(std::vector<SampleRecord> records,
                                         double val_fraction, uint64_t seed) {
  std::vector<std::string> offenders;
  for (size_t i = 0; i < records.size(); ++i) {
    if (records[i].speed_kmh == 0) {
      offenders.push_back("record " + std::to_string(i) + " (" +
                          records[i].path + ")");
    }
  }
  if (!offenders.empty()) {
    std::ostringstream msg;
    msg << "split_by_speed: " << offenders.size() << " record(s) with unknown speed";
    for (const auto& o : offenders) msg << "\n  " << o;
    throw SplitError(msg.str());
  }

  std::vector<size_t> pool;
  for (size_t i = 0; i < records.size(); ++i) {
    if (records[i].speed_kmh == 70) {
      records[i].split = Split::test;
    } else {
      records[i].split = Split::train;
      pool.push_back(i);
    }
  }

  // stratified val carve of the 30/50 pool
  Rng rng(seed);
  std::map<ClassLabel, std::vector<size_t>> groups;
  for (const size_t i : pool) groups[records[i].label].push_back(i);
  for (auto& [label, idx] : groups) {
    (void)label;
    const auto val_n = static_cast<size_t>(
        std::llround(val_fraction * static_cast<double>(idx.size())));
    rng.shuffle(idx);
    for (size_t j = 0; j < val_n && j < idx.size(); ++j) {
      records[idx[j]].split = Split::val;
    }
  }
  return records;
}

std::vector<SampleRecord> balanced_subsample(
    const std::vector<SampleRecord>& records, size_t per_class,
    const std::set<ClassLabel>& targets, uint64_t seed) {
  Rng rng(seed);
  std::vector<char> keep(records.size(), 1);
  auto groups = by_class(records);
  for (const ClassLabel label : kAllClasses) {  // fixed order for determinism
    if (!targets.count(label)) continue;
    auto it = groups.find(label);
    const size_t have = it == groups.end() ? 0 : it->second.size();
    if (have < per_class) {
      throw SubsampleError("balanced_subsample: class " +
                           std::string(to_string(label)) + " has " +
                           std::to_string(have) + " records, need " +
                           std::to_string(per_class));
    }
    auto idx = it->second;
    rng.shuffle(idx);
    for (size_t j = per_class; j < idx.size(); ++j) keep[idx[j]] = 0;
  }
  std::vector<SampleRecord> out;
  out.reserve(records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    if (keep[i]) out.push_back(records[i]);
  }
  return out;
}

std::vector<SampleRecord> shuffle_split(std::vector<SampleRecord> records,
                                        double train_fraction, uint64_t seed,
                                        bool allow_synthetic_test) {
  if (records.empty()) throw InvalidArgument("shuffle_split: no records");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgument("shuffle_split: train_fraction must be in (0, 1)");
  }
  Rng rng(seed);
  rng.shuffle(records);
  const auto n_train = static_cast<size_t>(
      std::llround(train_fraction * static_cast<double>(records.size())));
  std::vector<std::string> synthetic_in_test;
  for (size_t i = 0; i < records.size(); ++i) {
    records[i].split = i < n_train ? Split::train : Split::test;
    if (records[i].split == Split::test && records[i].synthetic) {
      synthetic_in_test.push_back(records[i].path);
    }
  }
  if (!synthetic_in_test.empty() && !allow_synthetic_test) {
    std::ostringstream msg;
    msg << "shuffle_split: " << synthetic_in_test.size()
        << " synthetic record(s) assigned to the test split"
        << " (pass the synthetic-test override to permit this)";
    for (const auto& p : synthetic_in_test) msg << "\n  " << p;
    throw SplitError(msg.str());
  }
  return records;
}

}  // namespace avc
