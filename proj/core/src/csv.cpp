#include "tids/csv.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string_view>

#include "tids/errors.hpp"

namespace tids {

namespace {

constexpr std::size_t kMaxReportedErrors = 25;

void note_error(LoadReport* report, std::size_t lineno, const std::string& what) {
  if (!report) return;
  ++report->rows_rejected;
  if (report->errors.size() < kMaxReportedErrors)
    report->errors.push_back("line " + std::to_string(lineno) + ": " + what);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::string_view trim_view(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

bool parse_real(std::string_view s, double& out) {
  s = trim_view(s);
  if (s.empty()) return false;
  if (s == "Infinity") {
    out = std::numeric_limits<double>::infinity();
    return true;
  }
  if (s == "-Infinity") {
    out = -std::numeric_limits<double>::infinity();
    return true;
  }
  if (s == "NaN") {
    out = std::numeric_limits<double>::quiet_NaN();
    return true;
  }
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

bool parse_hex(std::string_view s, std::uint64_t& out) {
  s = trim_view(s);
  if (s.empty()) return false;
  std::string lowered(s);  // loggers emit either case
  for (char& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  out = 0;
  auto [p, ec] = std::from_chars(lowered.data(), lowered.data() + lowered.size(), out, 16);
  return ec == std::errc() && p == lowered.data() + lowered.size();
}

int intern_class(std::vector<std::string>& names, std::map<std::string, int>& index,
                 const std::string& name) {
  auto it = index.find(name);
  if (it != index.end()) return it->second;
  int code = static_cast<int>(names.size());
  names.push_back(name);
  index.emplace(name, code);
  return code;
}

struct RowBuffer {
  std::vector<double> values;  // row-major
  std::vector<int> labels;
  std::vector<double> timestamps;
};

LabeledDataset finish(RowBuffer&& buf, std::vector<std::string> feature_names,
                      std::vector<std::string> class_names, bool keep_timestamps) {
  LabeledDataset d;
  const std::size_t f = feature_names.size();
  const std::size_t n = buf.labels.size();
  d.feature_names = std::move(feature_names);
  d.class_names = std::move(class_names);
  d.labels = std::move(buf.labels);
  d.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(f));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < f; ++j)
      d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          buf.values[i * f + j];
  if (keep_timestamps) d.timestamps = std::move(buf.timestamps);
  mark_attack_classes(d);
  return d;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

LabeledDataset load_can_csv_text(const std::string& text, const CanLabelPolicy& policy,
                                 LoadReport* report) {
  std::vector<std::string> feature_names = {"CAN ID",  "DLC",     "DATA[0]", "DATA[1]",
                                            "DATA[2]", "DATA[3]", "DATA[4]", "DATA[5]",
                                            "DATA[6]", "DATA[7]"};
  std::vector<std::string> class_names;
  std::map<std::string, int> class_index;
  if (policy.kind == CanLabelPolicy::Kind::FlagColumn && policy.attack_name.empty())
    throw ConfigError("flag-column CAN files need an attack name");

  RowBuffer buf;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view lv = trim_view(line);
    if (lv.empty()) continue;
    if (report) ++report->rows_total;
    auto fields = split_fields(lv);
    if (fields.size() < 4) {
      note_error(report, lineno, "too few fields");
      continue;
    }
    double ts = 0;
    if (!parse_real(fields[0], ts) || !std::isfinite(ts)) {
      note_error(report, lineno, "bad timestamp: " + std::string(fields[0]));
      continue;
    }
    std::uint64_t can_id = 0;
    if (!parse_hex(fields[1], can_id)) {
      note_error(report, lineno, "malformed hex CAN id: " + std::string(fields[1]));
      continue;
    }
    if (can_id >= 2048) {
      note_error(report, lineno, "CAN id exceeds 11 bits: " + std::string(fields[1]));
      continue;
    }
    double dlc_v = 0;
    if (!parse_real(fields[2], dlc_v) || dlc_v != std::floor(dlc_v)) {
      note_error(report, lineno, "bad dlc: " + std::string(fields[2]));
      continue;
    }
    auto dlc = static_cast<long long>(dlc_v);
    if (dlc < 0 || dlc > 8) {
      note_error(report, lineno, "dlc outside [0,8]: " + std::string(fields[2]));
      continue;
    }
    if (fields.size() != static_cast<std::size_t>(4 + dlc)) {
      note_error(report, lineno, "field count does not match dlc");
      continue;
    }
    double bytes[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    bool ok = true;
    for (long long b = 0; b < dlc; ++b) {
      std::uint64_t v = 0;
      if (!parse_hex(fields[static_cast<std::size_t>(3 + b)], v) || v > 255) {
        note_error(report, lineno,
                   "malformed hex data byte: " + std::string(fields[static_cast<std::size_t>(3 + b)]));
        ok = false;
        break;
      }
      bytes[b] = static_cast<double>(v);
    }
    if (!ok) continue;

    std::string_view tail = trim_view(fields.back());
    int label;
    if (policy.kind == CanLabelPolicy::Kind::FlagColumn) {
      if (tail == "R") {
        label = intern_class(class_names, class_index, "Normal");
      } else if (tail == "T") {
        label = intern_class(class_names, class_index, policy.attack_name);
      } else {
        note_error(report, lineno, "flag is neither R nor T: " + std::string(tail));
        continue;
      }
    } else {
      if (tail.empty()) {
        note_error(report, lineno, "empty label");
        continue;
      }
      label = intern_class(class_names, class_index, std::string(tail));
    }

    buf.values.push_back(static_cast<double>(can_id));
    buf.values.push_back(static_cast<double>(dlc));
    for (double b : bytes) buf.values.push_back(b);
    buf.labels.push_back(label);
    buf.timestamps.push_back(ts);
  }
  if (buf.labels.empty()) throw DataError("CAN csv produced no usable rows");
  return finish(std::move(buf), std::move(feature_names), std::move(class_names), true);
}

LabeledDataset load_can_csv(const std::string& path, const CanLabelPolicy& policy,
                            LoadReport* report) {
  return load_can_csv_text(slurp(path), policy, report);
}

LabeledDataset load_flow_csv_text(const std::string& text, LoadReport* report) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("flow csv is empty");
  auto header = split_fields(trim_view(line));
  int label_col = -1;
  std::vector<std::string> feature_names;
  for (std::size_t j = 0; j < header.size(); ++j) {
    std::string name(trim_view(header[j]));
    if (name == "Label") {
      if (label_col >= 0) throw DataError("flow csv has two Label columns");
      label_col = static_cast<int>(j);
    } else {
      feature_names.push_back(std::move(name));
    }
  }
  if (label_col < 0) throw DataError("flow csv has no Label column");

  std::vector<std::string> class_names;
  std::map<std::string, int> class_index;
  RowBuffer buf;
  const std::size_t want = header.size();
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view lv = trim_view(line);
    if (lv.empty()) continue;
    if (report) ++report->rows_total;
    auto fields = split_fields(lv);
    if (fields.size() != want) {
      note_error(report, lineno, "expected " + std::to_string(want) + " fields, got " +
                                     std::to_string(fields.size()));
      continue;
    }
    std::vector<double> row;
    row.reserve(want - 1);
    bool ok = true;
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (static_cast<int>(j) == label_col) continue;
      double v = 0;
      if (!parse_real(fields[j], v)) {
        note_error(report, lineno, "non-numeric feature cell: " + std::string(fields[j]));
        ok = false;
        break;
      }
      row.push_back(v);
    }
    if (!ok) continue;
    std::string_view label_sv = trim_view(fields[static_cast<std::size_t>(label_col)]);
    if (label_sv.empty()) {
      note_error(report, lineno, "empty label");
      continue;
    }
    buf.values.insert(buf.values.end(), row.begin(), row.end());
    buf.labels.push_back(intern_class(class_names, class_index, std::string(label_sv)));
  }
  if (buf.labels.empty()) throw DataError("flow csv produced no usable rows");
  return finish(std::move(buf), std::move(feature_names), std::move(class_names), false);
}

LabeledDataset load_flow_csv(const std::string& path, LoadReport* report) {
  return load_flow_csv_text(slurp(path), report);
}

FeatureTable load_feature_csv_text(const std::string& text, LoadReport* report) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("feature csv is empty");
  auto header = split_fields(trim_view(line));
  int label_col = -1;
  std::vector<std::string> feature_names;
  for (std::size_t j = 0; j < header.size(); ++j) {
    std::string name(trim_view(header[j]));
    if (name == "Label") {
      if (label_col >= 0) throw DataError("feature csv has two Label columns");
      label_col = static_cast<int>(j);
    } else {
      feature_names.push_back(std::move(name));
    }
  }
  if (feature_names.empty()) throw DataError("feature csv has no feature columns");

  std::vector<double> values;
  std::vector<std::string> labels;
  const std::size_t want = header.size();
  const std::size_t f = feature_names.size();
  std::size_t lineno = 1;
  std::size_t kept = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view lv = trim_view(line);
    if (lv.empty()) continue;
    if (report) ++report->rows_total;
    auto fields = split_fields(lv);
    if (fields.size() != want) {
      note_error(report, lineno, "expected " + std::to_string(want) + " fields, got " +
                                     std::to_string(fields.size()));
      continue;
    }
    std::vector<double> row;
    row.reserve(f);
    bool ok = true;
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (static_cast<int>(j) == label_col) continue;
      double v = 0;
      if (!parse_real(fields[j], v)) {
        note_error(report, lineno, "non-numeric feature cell: " + std::string(fields[j]));
        ok = false;
        break;
      }
      row.push_back(v);
    }
    if (!ok) continue;
    values.insert(values.end(), row.begin(), row.end());
    if (label_col >= 0)
      labels.emplace_back(trim_view(fields[static_cast<std::size_t>(label_col)]));
    ++kept;
  }
  if (kept == 0) throw DataError("feature csv produced no usable rows");

  FeatureTable t;
  t.feature_names = std::move(feature_names);
  t.labels = std::move(labels);
  t.features.resize(static_cast<Eigen::Index>(kept), static_cast<Eigen::Index>(f));
  for (std::size_t i = 0; i < kept; ++i)
    for (std::size_t j = 0; j < f; ++j)
      t.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * f + j];
  return t;
}

FeatureTable load_feature_csv(const std::string& path, LoadReport* report) {
  return load_feature_csv_text(slurp(path), report);
}

namespace {

void append_real(std::string& out, double v) {
  char tmp[64];
  if (std::isnan(v)) {
    out += "NaN";
    return;
  }
  if (std::isinf(v)) {
    out += v > 0 ? "Infinity" : "-Infinity";
    return;
  }
  auto [p, ec] = std::to_chars(tmp, tmp + sizeof(tmp), v);
  require(ec == std::errc(), "real to text conversion failed");
  out.append(tmp, p);
}

}  // namespace

std::string canonical_csv_string(const LabeledDataset& d) {
  std::string out;
  for (const auto& name : d.feature_names) {
    out += name;
    out += ',';
  }
  out += "Label\n";
  const auto n = d.features.rows();
  const auto f = d.features.cols();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < f; ++j) {
      append_real(out, d.features(i, j));
      out += ',';
    }
    out += d.class_names.at(static_cast<std::size_t>(d.labels[static_cast<std::size_t>(i)]));
    out += '\n';
  }
  return out;
}

void write_canonical_csv(const LabeledDataset& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << canonical_csv_string(d);
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace tids
