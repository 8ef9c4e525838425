#include "tids/binning.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tids/errors.hpp"

namespace tids {

std::vector<int> discretize(const Vector& x, const BinningRule& rule) {
  if (rule.bins < 2) throw ConfigError("binning needs at least 2 bins");
  const auto n = static_cast<std::size_t>(x.size());
  std::vector<double> sorted(x.data(), x.data() + x.size());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::vector<int> codes(n);
  if (distinct.size() <= static_cast<std::size_t>(rule.bins)) {
    // few distinct values: each one is its own category
    for (std::size_t i = 0; i < n; ++i) {
      auto it = std::lower_bound(distinct.begin(), distinct.end(), x(static_cast<Eigen::Index>(i)));
      codes[i] = static_cast<int>(it - distinct.begin());
    }
    return codes;
  }

  std::vector<double> edges;
  edges.reserve(static_cast<std::size_t>(rule.bins) - 1);
  for (int b = 1; b < rule.bins; ++b) {
    double q = static_cast<double>(b) / rule.bins;
    double pos = q * static_cast<double>(n - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    double fracpart = pos - std::floor(pos);
    double edge = lo + 1 < n ? sorted[lo] + fracpart * (sorted[lo + 1] - sorted[lo]) : sorted[lo];
    edges.push_back(edge);
  }
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  for (std::size_t i = 0; i < n; ++i) {
    auto it = std::upper_bound(edges.begin(), edges.end(), x(static_cast<Eigen::Index>(i)));
    codes[i] = static_cast<int>(it - edges.begin());
  }
  return codes;
}

double entropy_bits(const std::vector<int>& codes) {
  std::map<int, std::size_t> counts;
  for (int c : codes) ++counts[c];
  const auto n = static_cast<double>(codes.size());
  double h = 0.0;
  for (const auto& [code, cnt] : counts) {
    double p = static_cast<double>(cnt) / n;
    h -= p * std::log2(p);
  }
  return h;
}

namespace {

double conditional_entropy_bits(const std::vector<int>& target, const std::vector<int>& given) {
  std::map<int, std::vector<int>> groups;
  for (std::size_t i = 0; i < target.size(); ++i) groups[given[i]].push_back(target[i]);
  const auto n = static_cast<double>(target.size());
  double h = 0.0;
  for (const auto& [code, members] : groups)
    h += (static_cast<double>(members.size()) / n) * entropy_bits(members);
  return h;
}

}  // namespace

double information_gain(const Vector& x, const std::vector<int>& labels, const BinningRule& rule) {
  if (static_cast<std::size_t>(x.size()) != labels.size())
    throw DataError("column and label lengths differ");
  std::vector<int> codes = discretize(x, rule);
  return entropy_bits(labels) - conditional_entropy_bits(labels, codes);
}

double symmetrical_uncertainty(const Vector& x1, const Vector& x2, const BinningRule& rule) {
  if (x1.size() != x2.size()) throw DataError("column lengths differ");
  std::vector<int> c1 = discretize(x1, rule);
  std::vector<int> c2 = discretize(x2, rule);
  // canonical argument order so both call orders take the same numeric path
  if (std::lexicographical_compare(c2.begin(), c2.end(), c1.begin(), c1.end())) std::swap(c1, c2);
  double h1 = entropy_bits(c1);
  double h2 = entropy_bits(c2);
  if (h1 + h2 == 0.0) return 0.0;
  double gain = h1 - conditional_entropy_bits(c1, c2);
  return 2.0 * gain / (h1 + h2);
}

}  // namespace tids
