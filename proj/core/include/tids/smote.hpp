#ifndef TIDS_SMOTE_HPP
#define TIDS_SMOTE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tids/dataset.hpp"

namespace tids {

struct SmoteConfig {
  int k_neighbors = 5;
  std::size_t target_count = 0;  // classes below this are raised to it
  std::uint64_t seed = 0;
};

// per-class target sizes: below-target classes are raised, others untouched
std::vector<std::size_t> smote_targets(const std::vector<std::size_t>& class_sizes,
                                       std::size_t target_count);

// synthetic rows interpolate a class row toward one of its k nearest
// same-class neighbors: x + r * (xi - x) with r uniform in [0, 1).
// originals are retained; classes of one row cannot be oversampled.
LabeledDataset smote(const LabeledDataset& d, const SmoteConfig& cfg,
                     std::vector<std::string>* warnings = nullptr);

}  // namespace tids

#endif
