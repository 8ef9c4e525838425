#include "tids/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "tids/errors.hpp"
#include "tids/rng.hpp"

namespace tids {

namespace {

// removes classes that lost every row, keeping the survivors' order
LabeledDataset compact_classes(const LabeledDataset& d) {
  std::vector<std::size_t> counts(d.class_names.size(), 0);
  for (int y : d.labels) counts[static_cast<std::size_t>(y)]++;
  std::vector<int> remap(d.class_names.size(), -1);
  LabeledDataset out = d;
  out.class_names.clear();
  out.attack_class.clear();
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) continue;
    remap[c] = static_cast<int>(out.class_names.size());
    out.class_names.push_back(d.class_names[c]);
    out.attack_class.push_back(d.attack_class[c]);
  }
  for (auto& y : out.labels) y = remap[static_cast<std::size_t>(y)];
  return out;
}

MetricsReport binary_report(const std::vector<bool>& pred, const std::vector<bool>& truth) {
  std::vector<int> p(pred.size());
  std::vector<int> t(truth.size());
  for (std::size_t i = 0; i < pred.size(); ++i) p[i] = pred[i] ? 1 : 0;
  for (std::size_t i = 0; i < truth.size(); ++i) t[i] = truth[i] ? 1 : 0;
  return compute_metrics(p, t, {0, 1});
}

int find_normal_class(const LabeledDataset& d) {
  for (std::size_t c = 0; c < d.attack_class.size(); ++c) {
    if (d.attack_class[c] == 0) return static_cast<int>(c);
  }
  throw DataError("dataset has no normal class");
}

}  // namespace

CvReport cross_validate(const LabeledDataset& train, const Config& cfg, int folds) {
  if (folds < 2) throw ConfigError("cross-validation needs at least two folds");
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  CvReport report;
  int folds_used = 0;
  const std::vector<int> fold_of =
      stratified_fold_ids(train.labels, static_cast<int>(train.class_names.size()), folds,
                          mix_seed(seed, 0xcf0f), &report.warnings, &folds_used);
  report.folds_used = folds_used;

  std::vector<bool> covered(train.rows(), false);
  for (int f = 0; f < folds_used; ++f) {
    std::vector<std::size_t> fit_rows;
    std::vector<std::size_t> val_rows;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
      (fold_of[i] == f ? val_rows : fit_rows).push_back(i);
    }
    const auto started = std::chrono::steady_clock::now();
    const LabeledDataset fold_train = compact_classes(train.take_rows(fit_rows));
    const PipelineModel model = train_pipeline(fold_train, cfg);
    const double fit_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    // fold classes can differ from the parent registry, so map by name
    std::vector<int> to_parent(model.class_names.size());
    for (std::size_t c = 0; c < model.class_names.size(); ++c) {
      const auto it = std::find(train.class_names.begin(), train.class_names.end(),
                                model.class_names[c]);
      require(it != train.class_names.end(), "fold class missing from parent registry");
      to_parent[c] = static_cast<int>(it - train.class_names.begin());
    }

    const auto eval_started = std::chrono::steady_clock::now();
    std::vector<int> stack_preds;
    std::vector<int> truths;
    std::vector<bool> pred_attack;
    std::vector<bool> truth_attack;
    for (std::size_t r : val_rows) {
      require(!covered[r], "fold coverage overlap");
      covered[r] = true;
      const Vector raw = train.features.row(static_cast<Eigen::Index>(r)).transpose();
      const Vector sel = model.selection.apply_row(zscore_apply_row(model.scaler, raw));
      stack_preds.push_back(to_parent[static_cast<std::size_t>(model.stack.predict(sel))]);
      truths.push_back(train.labels[r]);
      const Verdict v = model.detect(raw);
      pred_attack.push_back(verdict_is_attack(v));
      truth_attack.push_back(train.attack_class[static_cast<std::size_t>(train.labels[r])] != 0);
    }
    MetricsReport fold_report = compute_metrics(stack_preds, truths, train.attack_class);
    const MetricsReport routed = metrics_from_binary(binary_counts(pred_attack, truth_attack));
    fold_report.binary = routed.binary;
    fold_report.accuracy = routed.accuracy;
    fold_report.detection_rate = routed.detection_rate;
    fold_report.false_alarm_rate = routed.false_alarm_rate;
    fold_report.f1 = routed.f1;
    fold_report.train_seconds = fit_seconds;
    fold_report.eval_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - eval_started).count();
    report.folds.push_back(std::move(fold_report));
  }
  for (bool c : covered) require(c, "fold coverage gap");

  MetricsReport& mean = report.mean;
  const std::size_t classes = train.class_names.size();
  mean.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
  mean.class_precision.assign(classes, 0.0);
  mean.class_recall.assign(classes, 0.0);
  mean.class_f1.assign(classes, 0.0);
  const double inv = 1.0 / static_cast<double>(report.folds.size());
  for (const MetricsReport& f : report.folds) {
    for (std::size_t a = 0; a < classes; ++a) {
      for (std::size_t b = 0; b < classes; ++b) mean.confusion[a][b] += f.confusion[a][b];
    }
    mean.binary.tp += f.binary.tp;
    mean.binary.fn += f.binary.fn;
    mean.binary.fp += f.binary.fp;
    mean.binary.tn += f.binary.tn;
    mean.accuracy += f.accuracy * inv;
    mean.detection_rate += f.detection_rate * inv;
    mean.false_alarm_rate += f.false_alarm_rate * inv;
    mean.f1 += f.f1 * inv;
    mean.macro_f1 += f.macro_f1 * inv;
    for (std::size_t c = 0; c < classes; ++c) {
      mean.class_precision[c] += f.class_precision[c] * inv;
      mean.class_recall[c] += f.class_recall[c] * inv;
      mean.class_f1[c] += f.class_f1[c] * inv;
    }
    mean.train_seconds += f.train_seconds * inv;
    mean.eval_seconds += f.eval_seconds * inv;
  }
  return report;
}

ZeroDayReport zero_day_eval(const LabeledDataset& d, const std::string& attack_class,
                            const Config& cfg) {
  const auto cls = std::find(d.class_names.begin(), d.class_names.end(), attack_class);
  if (cls == d.class_names.end()) {
    std::string names;
    for (const std::string& n : d.class_names) {
      if (!names.empty()) names += ", ";
      names += n;
    }
    throw DataError("class '" + attack_class + "' not in the dataset; available: " + names);
  }
  const int held = static_cast<int>(cls - d.class_names.begin());
  if (d.attack_class[static_cast<std::size_t>(held)] == 0) {
    throw ConfigError("zero-day evaluation holds out an attack class, not the normal class");
  }
  const int normal = find_normal_class(d);
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));

  ZeroDayReport report;
  report.held_out = attack_class;

  std::vector<std::size_t> attack_rows;
  std::vector<std::size_t> normal_pool;
  for (std::size_t i = 0; i < d.labels.size(); ++i) {
    if (d.labels[i] == held) attack_rows.push_back(i);
    if (d.labels[i] == normal) normal_pool.push_back(i);
  }
  if (attack_rows.empty()) throw DataError("held-out class has no rows");

  Rng rng(mix_seed(seed, 0x2e0d));
  std::vector<std::size_t> normal_rows;
  if (normal_pool.size() >= attack_rows.size()) {
    const std::vector<std::size_t> pick =
        rng.sample_without_replacement(normal_pool.size(), attack_rows.size());
    for (std::size_t p : pick) normal_rows.push_back(normal_pool[p]);
  } else {
    report.warnings.push_back("normal pool smaller than the held-out attack; "
                              "sampling validation normals with replacement");
    for (std::size_t i = 0; i < attack_rows.size(); ++i) {
      normal_rows.push_back(normal_pool[rng.below(normal_pool.size())]);
    }
  }

  std::set<std::size_t> excluded(attack_rows.begin(), attack_rows.end());
  excluded.insert(normal_rows.begin(), normal_rows.end());
  std::vector<std::size_t> train_rows;
  for (std::size_t i = 0; i < d.labels.size(); ++i) {
    if (excluded.find(i) == excluded.end()) train_rows.push_back(i);
  }
  for (std::size_t r : train_rows) {
    require(d.labels[r] != held, "held-out class leaked into training");
  }

  const LabeledDataset train_part = compact_classes(d.take_rows(train_rows));
  for (const std::string& n : train_part.class_names) {
    require(n != attack_class, "held-out class name leaked into the training registry");
  }
  const PipelineModel model = train_pipeline(train_part, cfg);

  std::vector<std::size_t> val_rows = attack_rows;
  val_rows.insert(val_rows.end(), normal_rows.begin(), normal_rows.end());
  report.validation_rows = val_rows.size();

  std::vector<bool> truth;
  std::vector<bool> full_pred;
  std::vector<bool> ablation_pred;
  for (std::size_t r : val_rows) {
    const Vector raw = d.features.row(static_cast<Eigen::Index>(r)).transpose();
    truth.push_back(d.labels[r] == held);
    full_pred.push_back(verdict_is_attack(model.detect(raw)));
    // ablation: the labeled-clustering verdict alone, no stack, no correctors
    const Vector z = kpca_transform_row(
        model.kpca, model.selection.apply_row(zscore_apply_row(model.scaler, raw)));
    ablation_pred.push_back(cluster_assign(model.anomaly.clm, z).label == 1);
  }
  report.full = binary_report(full_pred, truth);
  report.ablation = binary_report(ablation_pred, truth);
  return report;
}

}  // namespace tids
