#include "tids/metrics.hpp"

#include <algorithm>
#include <cstdio>

#include "tids/errors.hpp"

namespace tids {

double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

BinaryCounts binary_counts(const std::vector<bool>& predicted_positive,
                           const std::vector<bool>& truth_positive) {
  if (predicted_positive.size() != truth_positive.size())
    throw DataError("prediction and truth lengths differ");
  BinaryCounts c;
  for (std::size_t i = 0; i < truth_positive.size(); ++i) {
    if (truth_positive[i])
      predicted_positive[i] ? ++c.tp : ++c.fn;
    else
      predicted_positive[i] ? ++c.fp : ++c.tn;
  }
  return c;
}

MetricsReport metrics_from_binary(const BinaryCounts& c) {
  MetricsReport r;
  r.binary = c;
  auto tp = static_cast<double>(c.tp);
  auto fn = static_cast<double>(c.fn);
  auto fp = static_cast<double>(c.fp);
  auto tn = static_cast<double>(c.tn);
  r.accuracy = safe_ratio(tp + tn, tp + tn + fp + fn);
  r.detection_rate = safe_ratio(tp, tp + fn);
  r.false_alarm_rate = safe_ratio(fp, tn + fp);
  r.f1 = safe_ratio(2.0 * tp, 2.0 * tp + fp + fn);
  return r;
}

MetricsReport compute_metrics(const std::vector<int>& predictions, const std::vector<int>& truth,
                              const std::vector<std::uint8_t>& attack_class) {
  if (predictions.size() != truth.size()) throw DataError("prediction and truth lengths differ");
  if (truth.empty()) throw DataError("no rows to score");
  const auto n_classes = attack_class.size();

  std::vector<bool> pred_pos(predictions.size()), truth_pos(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    auto p = static_cast<std::size_t>(predictions[i]);
    auto t = static_cast<std::size_t>(truth[i]);
    if (p >= n_classes || t >= n_classes) throw DataError("class index outside registry");
    pred_pos[i] = attack_class[p] != 0;
    truth_pos[i] = attack_class[t] != 0;
  }
  MetricsReport r = metrics_from_binary(binary_counts(pred_pos, truth_pos));

  r.confusion.assign(n_classes, std::vector<std::size_t>(n_classes, 0));
  for (std::size_t i = 0; i < truth.size(); ++i)
    ++r.confusion[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predictions[i])];

  r.class_precision.assign(n_classes, 0.0);
  r.class_recall.assign(n_classes, 0.0);
  r.class_f1.assign(n_classes, 0.0);
  double macro_sum = 0.0;
  std::size_t macro_count = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    double tp = static_cast<double>(r.confusion[c][c]);
    double support = 0.0, predicted = 0.0;
    for (std::size_t j = 0; j < n_classes; ++j) {
      support += static_cast<double>(r.confusion[c][j]);
      predicted += static_cast<double>(r.confusion[j][c]);
    }
    r.class_precision[c] = safe_ratio(tp, predicted);
    r.class_recall[c] = safe_ratio(tp, support);
    r.class_f1[c] = safe_ratio(2.0 * r.class_precision[c] * r.class_recall[c],
                               r.class_precision[c] + r.class_recall[c]);
    if (support > 0.0) {
      macro_sum += r.class_f1[c];
      ++macro_count;
    }
  }
  r.macro_f1 = macro_count > 0 ? macro_sum / static_cast<double>(macro_count) : 0.0;
  return r;
}

double macro_f1_score(const std::vector<int>& predictions, const std::vector<int>& truth,
                      int n_classes) {
  std::vector<std::uint8_t> attack(static_cast<std::size_t>(n_classes), 1);
  if (!attack.empty()) attack[0] = 0;  // collapse roles are irrelevant for macro f1
  return compute_metrics(predictions, truth, attack).macro_f1;
}

std::string MetricsReport::table(const std::vector<std::string>& class_names) const {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line),
                "accuracy %.5f  detection_rate %.5f  false_alarm_rate %.5f  f1 %.5f  macro_f1 %.5f\n",
                accuracy, detection_rate, false_alarm_rate, f1, macro_f1);
  out += line;
  std::snprintf(line, sizeof(line), "binary counts: tp=%zu fn=%zu fp=%zu tn=%zu\n", binary.tp,
                binary.fn, binary.fp, binary.tn);
  out += line;
  for (std::size_t c = 0; c < class_f1.size() && c < class_names.size(); ++c) {
    std::snprintf(line, sizeof(line), "  %-24s precision %.5f recall %.5f f1 %.5f\n",
                  class_names[c].c_str(), class_precision[c], class_recall[c], class_f1[c]);
    out += line;
  }
  return out;
}

}  // namespace tids
