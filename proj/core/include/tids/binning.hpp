#ifndef TIDS_BINNING_HPP
#define TIDS_BINNING_HPP

#include <vector>

#include "tids/dataset.hpp"

namespace tids {

struct BinningRule {
  int bins = 20;  // quantile bins; columns with <= bins distinct values keep them as-is
};

// integer codes per value; quantile edges are deduplicated
std::vector<int> discretize(const Vector& x, const BinningRule& rule);

// Shannon entropy of integer codes, base 2
double entropy_bits(const std::vector<int>& codes);

// H(T) - H(T|X) where X is the binned column and T the labels
double information_gain(const Vector& x, const std::vector<int>& labels, const BinningRule& rule);

// 2 * I(X;Y) / (H(X) + H(Y)) on binned columns, 0 when both entropies vanish
double symmetrical_uncertainty(const Vector& x1, const Vector& x2, const BinningRule& rule);

}  // namespace tids

#endif
