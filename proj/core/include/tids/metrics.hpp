#ifndef TIDS_METRICS_HPP
#define TIDS_METRICS_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace tids {

// binary collapse counts: positive = any attack class
struct BinaryCounts {
  std::size_t tp = 0, fn = 0, fp = 0, tn = 0;
};

struct MetricsReport {
  std::vector<std::vector<std::size_t>> confusion;  // truth x predicted
  BinaryCounts binary;
  double accuracy = 0.0;
  double detection_rate = 0.0;   // tp / (tp + fn)
  double false_alarm_rate = 0.0; // fp / (tn + fp)
  double f1 = 0.0;               // binary collapse
  double macro_f1 = 0.0;         // mean per-class f1 over classes with support
  std::vector<double> class_precision;
  std::vector<double> class_recall;
  std::vector<double> class_f1;
  double train_seconds = 0.0;
  double eval_seconds = 0.0;

  std::string table(const std::vector<std::string>& class_names) const;
};

double safe_ratio(double num, double den);

BinaryCounts binary_counts(const std::vector<bool>& predicted_positive,
                           const std::vector<bool>& truth_positive);

MetricsReport metrics_from_binary(const BinaryCounts& c);

// predictions and truth are class indices; attack_class marks positives
MetricsReport compute_metrics(const std::vector<int>& predictions, const std::vector<int>& truth,
                              const std::vector<std::uint8_t>& attack_class);

double macro_f1_score(const std::vector<int>& predictions, const std::vector<int>& truth,
                      int n_classes);

}  // namespace tids

#endif
