#include "avc/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "avc/errors.hpp"
#include "avc/util.hpp"

namespace avc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: bad boolean for " + key + ": '" + v + "'");
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: bad number for " + key + ": '" + v + "'");
  }
}

int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const int64_t i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for " + key + ": '" + v + "'");
  }
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream ss(v);
  while (std::getline(ss, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) parts.push_back(cur);
  }
  return parts;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string join_factors(const std::vector<double>& fs) {
  std::string out;
  for (const double f : fs) {
    if (!out.empty()) out += ",";
    out += format_double(f);
  }
  return out;
}

std::string join_classes(const std::set<ClassLabel>& cs) {
  std::string out;
  for (const ClassLabel c : kAllClasses) {
    if (!cs.count(c)) continue;
    if (!out.empty()) out += ",";
    out += to_string(c);
  }
  return out;
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ": line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    cfg.apply_override(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

void RunConfig::apply_override(const std::string& key_equals_value) {
  const auto eq = key_equals_value.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override must be key=value: '" + key_equals_value + "'");
  }
  apply_override(trim(key_equals_value.substr(0, eq)),
                 trim(key_equals_value.substr(eq + 1)));
}

void RunConfig::apply_override(const std::string& key, const std::string& value) {
  if (key == "manifest") {
    manifest = value;
  } else if (key == "out") {
    out_dir = value;
  } else if (key == "feature") {
    feature = feature_kind_from_string(value);
  } else if (key == "quality_gate") {
    quality_gate = parse_bool(key, value);
  } else if (key == "quality_class") {
    quality_class = class_label_from_string(value);
  } else if (key == "augment") {
    augment = parse_bool(key, value);
  } else if (key == "stretch_factors") {
    stretch_factors.clear();
    for (const auto& p : split_list(value)) {
      stretch_factors.push_back(parse_double(key, p));
    }
  } else if (key == "keep_original") {
    keep_original = parse_bool(key, value);
  } else if (key == "augment_classes") {
    augment_classes.clear();
    for (const auto& p : split_list(value)) {
      augment_classes.insert(class_label_from_string(p));
    }
  } else if (key == "split_mode") {
    if (value == "shuffled") {
      split_mode = SplitSpec::Mode::shuffled;
    } else if (value == "by_speed") {
      split_mode = SplitSpec::Mode::by_speed;
    } else {
      throw ConfigError("config: split_mode must be shuffled or by_speed");
    }
  } else if (key == "train_fraction") {
    train_fraction = parse_double(key, value);
  } else if (key == "val_fraction") {
    val_fraction = parse_double(key, value);
  } else if (key == "allow_synthetic_test") {
    allow_synthetic_test = parse_bool(key, value);
  } else if (key == "subsample_per_class") {
    subsample_per_class = static_cast<size_t>(parse_int(key, value));
  } else if (key == "subsample_targets") {
    subsample_targets.clear();
    for (const auto& p : split_list(value)) {
      subsample_targets.insert(class_label_from_string(p));
    }
  } else if (key == "epochs") {
    epochs = static_cast<int>(parse_int(key, value));
  } else if (key == "batch_size") {
    batch_size = static_cast<int>(parse_int(key, value));
  } else if (key == "base_lr") {
    base_lr = parse_double(key, value);
  } else if (key == "min_lr") {
    min_lr = parse_double(key, value);
  } else if (key == "plateau_patience") {
    plateau_patience = static_cast<int>(parse_int(key, value));
  } else if (key == "plateau_factor") {
    plateau_factor = parse_double(key, value);
  } else if (key == "dropout") {
    dropout = parse_double(key, value);
  } else if (key == "seed") {
    seed = static_cast<uint64_t>(parse_int(key, value));
  } else if (key == "quality_seed") {
    quality_seed = static_cast<uint64_t>(parse_int(key, value));
  } else if (key == "split_seed") {
    split_seed = static_cast<uint64_t>(parse_int(key, value));
  } else if (key == "nn_seed") {
    nn_seed = static_cast<uint64_t>(parse_int(key, value));
  } else if (key == "subsample_seed") {
    subsample_seed = static_cast<uint64_t>(parse_int(key, value));
  } else if (key == "jobs") {
    jobs = static_cast<int>(parse_int(key, value));
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

std::string RunConfig::resolved_text() const {
  std::vector<std::pair<std::string, std::string>> kv = {
      {"allow_synthetic_test", allow_synthetic_test ? "on" : "off"},
      {"augment", augment ? "on" : "off"},
      {"augment_classes", join_classes(augment_classes)},
      {"base_lr", format_double(base_lr)},
      {"batch_size", std::to_string(batch_size)},
      {"dropout", format_double(dropout)},
      {"epochs", std::to_string(epochs)},
      {"feature", to_string(feature)},
      {"keep_original", keep_original ? "on" : "off"},
      {"manifest", manifest},
      {"min_lr", format_double(min_lr)},
      {"nn_seed", std::to_string(effective_nn_seed())},
      {"plateau_factor", format_double(plateau_factor)},
      {"plateau_patience", std::to_string(plateau_patience)},
      {"quality_class", to_string(quality_class)},
      {"quality_gate", quality_gate ? "on" : "off"},
      {"quality_seed", std::to_string(effective_quality_seed())},
      {"seed", std::to_string(seed)},
      {"split_mode",
       split_mode == SplitSpec::Mode::shuffled ? "shuffled" : "by_speed"},
      {"split_seed", std::to_string(effective_split_seed())},
      {"stretch_factors", join_factors(stretch_factors)},
      {"subsample_per_class", std::to_string(subsample_per_class)},
      {"subsample_seed", std::to_string(effective_subsample_seed())},
      {"subsample_targets", join_classes(subsample_targets)},
      {"train_fraction", format_double(train_fraction)},
      {"val_fraction", format_double(val_fraction)},
  };
  std::string out;
  for (const auto& [k, v] : kv) {
    out += k;
    out += " = ";
    out += v;
    out += "\n";
  }
  return out;
}

std::string RunConfig::fingerprint() const {
  return to_hex(fnv1a64(resolved_text()));
}

}  // namespace avc
