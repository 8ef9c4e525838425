#include "tids/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "tids/errors.hpp"
#include "tids/rng.hpp"

namespace tids {

std::vector<std::size_t> LabeledDataset::class_counts() const {
  std::vector<std::size_t> counts(class_names.size(), 0);
  for (int y : labels) {
    if (y < 0 || y >= static_cast<int>(counts.size()))
      throw InternalError("label outside class registry");
    ++counts[static_cast<std::size_t>(y)];
  }
  return counts;
}

LabeledDataset LabeledDataset::take_rows(const std::vector<std::size_t>& idx) const {
  LabeledDataset out;
  out.feature_names = feature_names;
  out.class_names = class_names;
  out.attack_class = attack_class;
  out.features.resize(static_cast<Eigen::Index>(idx.size()), features.cols());
  out.labels.resize(idx.size());
  if (!timestamps.empty()) out.timestamps.resize(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) =
        features.row(static_cast<Eigen::Index>(idx[i]));
    out.labels[i] = labels[idx[i]];
    if (!timestamps.empty()) out.timestamps[i] = timestamps[idx[i]];
  }
  return out;
}

void mark_attack_classes(LabeledDataset& d, const std::string& normal_name) {
  static const char* kNormalNames[] = {"Normal", "BENIGN", "Benign", "normal", "benign"};
  d.attack_class.assign(d.class_names.size(), 1);
  int hit = -1;
  for (std::size_t c = 0; c < d.class_names.size(); ++c) {
    bool is_normal = false;
    if (!normal_name.empty()) {
      is_normal = d.class_names[c] == normal_name;
    } else {
      for (const char* cand : kNormalNames)
        if (d.class_names[c] == cand) is_normal = true;
    }
    if (is_normal) {
      if (hit >= 0)
        throw DataError("multiple classes look like the normal class: " + d.class_names[hit] +
                        " and " + d.class_names[c]);
      hit = static_cast<int>(c);
      d.attack_class[c] = 0;
    }
  }
  if (!normal_name.empty() && hit < 0)
    throw DataError("normal class '" + normal_name + "' not present in class registry");
}

LabeledDataset sanitize(const LabeledDataset& d, SanitizeReport* report) {
  LabeledDataset out = d;
  const Eigen::Index n = out.features.rows();
  const Eigen::Index f = out.features.cols();
  SanitizeReport rep;

  for (Eigen::Index j = 0; j < f; ++j) {
    std::vector<double> finite;
    finite.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      double v = out.features(i, j);
      if (std::isfinite(v)) finite.push_back(v);
    }
    if (finite.empty()) {
      std::string name = j < static_cast<Eigen::Index>(out.feature_names.size())
                             ? out.feature_names[static_cast<std::size_t>(j)]
                             : ("column " + std::to_string(j));
      throw DataError("column has no finite entries: " + name);
    }
    if (finite.size() < static_cast<std::size_t>(n)) {
      std::sort(finite.begin(), finite.end());
      std::size_t m = finite.size();
      double median = (m % 2 == 1) ? finite[m / 2] : 0.5 * (finite[m / 2 - 1] + finite[m / 2]);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::isfinite(out.features(i, j))) {
          out.features(i, j) = median;
          ++rep.repaired_cells;
        }
      }
    }
    bool constant = true;
    for (Eigen::Index i = 1; i < n && constant; ++i)
      if (out.features(i, j) != out.features(0, j)) constant = false;
    if (constant && n > 0) {
      rep.constant_columns.push_back(j < static_cast<Eigen::Index>(out.feature_names.size())
                                         ? out.feature_names[static_cast<std::size_t>(j)]
                                         : ("column " + std::to_string(j)));
    }
  }

  // re-encode labels against the sorted registry
  std::vector<std::string> sorted_names = out.class_names;
  std::sort(sorted_names.begin(), sorted_names.end());
  sorted_names.erase(std::unique(sorted_names.begin(), sorted_names.end()), sorted_names.end());
  std::map<std::string, int> code;
  for (std::size_t c = 0; c < sorted_names.size(); ++c) code[sorted_names[c]] = static_cast<int>(c);
  std::vector<int> remap(out.class_names.size());
  for (std::size_t c = 0; c < out.class_names.size(); ++c) remap[c] = code[out.class_names[c]];
  for (auto& y : out.labels) y = remap[static_cast<std::size_t>(y)];
  std::vector<std::uint8_t> attack(sorted_names.size(), 1);
  if (out.attack_class.size() == out.class_names.size()) {
    for (std::size_t c = 0; c < out.class_names.size(); ++c)
      attack[static_cast<std::size_t>(remap[c])] = out.attack_class[c];
  }
  out.class_names = std::move(sorted_names);
  out.attack_class = std::move(attack);

  if (report) *report = std::move(rep);
  return out;
}

std::vector<std::size_t> stratified_train_counts(const std::vector<std::size_t>& class_sizes,
                                                 double fraction) {
  if (fraction < 0.0 || fraction > 1.0) throw ConfigError("train fraction must lie in [0,1]");
  std::size_t total = std::accumulate(class_sizes.begin(), class_sizes.end(), std::size_t{0});
  auto target_total =
      static_cast<std::size_t>(std::llround(static_cast<double>(total) * fraction));
  std::vector<std::size_t> counts(class_sizes.size());
  std::vector<std::pair<double, std::size_t>> remainders;  // (-frac, class) for stable ordering
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < class_sizes.size(); ++c) {
    double exact = static_cast<double>(class_sizes[c]) * fraction;
    counts[c] = static_cast<std::size_t>(std::floor(exact));
    if (counts[c] > class_sizes[c]) counts[c] = class_sizes[c];
    assigned += counts[c];
    remainders.emplace_back(-(exact - std::floor(exact)), c);
  }
  std::sort(remainders.begin(), remainders.end());
  std::size_t leftover = target_total > assigned ? target_total - assigned : 0;
  for (const auto& [negfrac, c] : remainders) {
    if (leftover == 0) break;
    if (counts[c] < class_sizes[c]) {
      ++counts[c];
      --leftover;
    }
  }
  return counts;
}

std::pair<LabeledDataset, LabeledDataset> split_holdout(const LabeledDataset& d,
                                                        const SplitSpec& spec) {
  const std::size_t n = d.rows();
  Rng rng(mix_seed(spec.seed, 0x5117));
  std::vector<std::size_t> train_idx, test_idx;

  if (!spec.stratified) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    auto take = static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.train_fraction));
    train_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take));
    test_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(take), order.end());
  } else {
    auto sizes = d.class_counts();
    for (std::size_t c = 0; c < sizes.size(); ++c) {
      if (sizes[c] == 1)
        throw DataError("class '" + d.class_names[c] + "' has a single row, cannot stratify");
    }
    auto targets = stratified_train_counts(sizes, spec.train_fraction);
    std::vector<std::vector<std::size_t>> members(sizes.size());
    for (std::size_t i = 0; i < n; ++i)
      members[static_cast<std::size_t>(d.labels[i])].push_back(i);
    for (std::size_t c = 0; c < members.size(); ++c) {
      rng.shuffle(members[c]);
      for (std::size_t i = 0; i < members[c].size(); ++i) {
        if (i < targets[c])
          train_idx.push_back(members[c][i]);
        else
          test_idx.push_back(members[c][i]);
      }
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
  }
  return {d.take_rows(train_idx), d.take_rows(test_idx)};
}

std::vector<int> stratified_fold_ids(const std::vector<int>& labels, int n_classes, int folds,
                                     std::uint64_t seed, std::vector<std::string>* warnings,
                                     int* folds_used) {
  if (folds < 2) throw ConfigError("fold count must be at least 2");
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < labels.size(); ++i)
    members.at(static_cast<std::size_t>(labels[i])).push_back(i);
  std::size_t smallest = labels.size();
  for (const auto& m : members)
    if (!m.empty() && m.size() < smallest) smallest = m.size();
  int usable = folds;
  if (smallest < static_cast<std::size_t>(folds)) {
    usable = static_cast<int>(smallest);
    if (usable < 2) throw DataError("smallest class has fewer than 2 rows, cannot fold");
    if (warnings)
      warnings->push_back("fold count reduced from " + std::to_string(folds) + " to " +
                          std::to_string(usable) + " (smallest class has " +
                          std::to_string(smallest) + " rows)");
  }
  Rng rng(mix_seed(seed, 0xf01d5));
  std::vector<int> fold_of(labels.size(), -1);
  for (auto& m : members) {
    rng.shuffle(m);
    for (std::size_t i = 0; i < m.size(); ++i)
      fold_of[m[i]] = static_cast<int>(i % static_cast<std::size_t>(usable));
  }
  if (folds_used) *folds_used = usable;
  return fold_of;
}

LabeledDataset merge_datasets(const std::vector<LabeledDataset>& parts) {
  if (parts.empty()) throw DataError("nothing to merge");
  LabeledDataset out;
  out.feature_names = parts.front().feature_names;
  std::size_t total = 0;
  bool all_timestamped = true;
  for (const LabeledDataset& p : parts) {
    if (p.feature_names != out.feature_names) {
      throw DataError("merged tables must share one feature layout");
    }
    total += p.rows();
    all_timestamped = all_timestamped && p.timestamps.size() == p.rows();
  }
  out.features.resize(static_cast<Eigen::Index>(total), parts.front().features.cols());
  out.labels.reserve(total);
  if (all_timestamped) out.timestamps.reserve(total);
  Eigen::Index at = 0;
  for (const LabeledDataset& p : parts) {
    std::vector<int> remap(p.class_names.size());
    for (std::size_t c = 0; c < p.class_names.size(); ++c) {
      const auto it =
          std::find(out.class_names.begin(), out.class_names.end(), p.class_names[c]);
      if (it == out.class_names.end()) {
        remap[c] = static_cast<int>(out.class_names.size());
        out.class_names.push_back(p.class_names[c]);
        out.attack_class.push_back(p.attack_class[c]);
      } else {
        remap[c] = static_cast<int>(it - out.class_names.begin());
        if (out.attack_class[static_cast<std::size_t>(remap[c])] != p.attack_class[c]) {
          throw DataError("class '" + p.class_names[c] + "' is normal in one table, attack in another");
        }
      }
    }
    out.features.middleRows(at, p.features.rows()) = p.features;
    at += p.features.rows();
    for (int y : p.labels) out.labels.push_back(remap[static_cast<std::size_t>(y)]);
    if (all_timestamped) {
      out.timestamps.insert(out.timestamps.end(), p.timestamps.begin(), p.timestamps.end());
    }
  }
  return out;
}

}  // namespace tids
