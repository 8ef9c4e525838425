#ifndef TIDS_DATASET_HPP
#define TIDS_DATASET_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace tids {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// dense labeled table: n rows by f real features plus an integer class per row
struct LabeledDataset {
  Matrix features;                          // n x f
  std::vector<int> labels;                  // n, indices into class_names
  std::vector<std::string> feature_names;   // f
  std::vector<std::string> class_names;     // class registry
  std::vector<std::uint8_t> attack_class;   // per class, 1 = attack / 0 = normal
  std::vector<double> timestamps;           // optional, empty when absent

  std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(features.cols()); }
  std::vector<std::size_t> class_counts() const;
  LabeledDataset take_rows(const std::vector<std::size_t>& idx) const;
};

struct SplitSpec {
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
  bool stratified = true;
};

struct SanitizeReport {
  std::size_t repaired_cells = 0;
  std::vector<std::string> constant_columns;
};

// marks the normal class by name; classes not matching any candidate are
// attacks. throws DataError if several candidates match.
void mark_attack_classes(LabeledDataset& d, const std::string& normal_name = "");

// replaces non-finite cells with the column median over finite entries,
// re-encodes labels against a sorted class registry. idempotent.
LabeledDataset sanitize(const LabeledDataset& d, SanitizeReport* report = nullptr);

// stacks several tables with identical feature layouts; class registries are
// united by name, labels re-encoded against the union
LabeledDataset merge_datasets(const std::vector<LabeledDataset>& parts);

// per-class train row counts: floor(count*fraction) plus largest-remainder
// distribution of the rounded global total
std::vector<std::size_t> stratified_train_counts(const std::vector<std::size_t>& class_sizes,
                                                 double fraction);

std::pair<LabeledDataset, LabeledDataset> split_holdout(const LabeledDataset& d,
                                                        const SplitSpec& spec);

// stratified fold ids in [0, folds); folds shrinks (with a warning appended
// to *warnings) when a class has fewer rows than requested folds
std::vector<int> stratified_fold_ids(const std::vector<int>& labels, int n_classes, int folds,
                                     std::uint64_t seed, std::vector<std::string>* warnings,
                                     int* folds_used);

}  // namespace tids

#endif
