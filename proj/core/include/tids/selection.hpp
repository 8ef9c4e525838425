#ifndef TIDS_SELECTION_HPP
#define TIDS_SELECTION_HPP

#include <string>
#include <vector>

#include "tids/binning.hpp"
#include "tids/dataset.hpp"

namespace tids {

// ordered feature subset kept after importance ranking and redundancy pruning
struct FeatureSelection {
  std::vector<int> kept;                  // original column indices, importance order
  std::vector<double> importance;         // normalized gain of the kept columns
  std::vector<std::string> kept_names;

  Matrix apply(const Matrix& x) const;
  Vector apply_row(const Vector& row) const;
};

// ranks columns by normalized information gain and keeps a prefix whose
// cumulative importance reaches alpha_ig; ties rank by column index
FeatureSelection ig_select(const LabeledDataset& d, double alpha_ig, const BinningRule& rule,
                           std::vector<std::string>* warnings = nullptr);

// drops the lower-importance member of any kept pair whose symmetrical
// uncertainty exceeds alpha_su
FeatureSelection fcbf_filter(const LabeledDataset& d, const FeatureSelection& sel, double alpha_su,
                             const BinningRule& rule);

}  // namespace tids

#endif
