#include "tids/selection.hpp"

#include <algorithm>

#include "tids/errors.hpp"

namespace tids {

Matrix FeatureSelection::apply(const Matrix& x) const {
  Matrix out(x.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    if (kept[j] < 0 || kept[j] >= x.cols())
      throw DataError("selection refers to column " + std::to_string(kept[j]) +
                      " but input has " + std::to_string(x.cols()));
    out.col(static_cast<Eigen::Index>(j)) = x.col(kept[j]);
  }
  return out;
}

Vector FeatureSelection::apply_row(const Vector& row) const {
  Vector out(static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    if (kept[j] < 0 || kept[j] >= row.size())
      throw DataError("selection refers to column " + std::to_string(kept[j]) +
                      " but row has " + std::to_string(row.size()));
    out(static_cast<Eigen::Index>(j)) = row(kept[j]);
  }
  return out;
}

FeatureSelection ig_select(const LabeledDataset& d, double alpha_ig, const BinningRule& rule,
                           std::vector<std::string>* warnings) {
  if (alpha_ig <= 0.0 || alpha_ig > 1.0) throw ConfigError("alpha_ig must lie in (0,1]");
  const auto f = d.features.cols();
  if (f == 0) throw DataError("dataset has no feature columns");
  std::vector<double> gain(static_cast<std::size_t>(f));
  double total = 0.0;
  for (Eigen::Index j = 0; j < f; ++j) {
    gain[static_cast<std::size_t>(j)] = information_gain(d.features.col(j), d.labels, rule);
    total += gain[static_cast<std::size_t>(j)];
  }

  FeatureSelection sel;
  if (total <= 0.0) {
    if (warnings)
      warnings->push_back("all columns have zero information gain, keeping every column");
    for (Eigen::Index j = 0; j < f; ++j) {
      sel.kept.push_back(static_cast<int>(j));
      sel.importance.push_back(1.0 / static_cast<double>(f));
    }
  } else {
    std::vector<int> order(static_cast<std::size_t>(f));
    for (Eigen::Index j = 0; j < f; ++j) order[static_cast<std::size_t>(j)] = static_cast<int>(j);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return gain[static_cast<std::size_t>(a)] > gain[static_cast<std::size_t>(b)];
    });
    double acc = 0.0;
    for (int j : order) {
      double w = gain[static_cast<std::size_t>(j)] / total;
      sel.kept.push_back(j);
      sel.importance.push_back(w);
      acc += w;
      if (acc >= alpha_ig - 1e-12) break;
    }
  }
  for (int j : sel.kept)
    sel.kept_names.push_back(j < static_cast<int>(d.feature_names.size())
                                 ? d.feature_names[static_cast<std::size_t>(j)]
                                 : ("column " + std::to_string(j)));
  return sel;
}

FeatureSelection fcbf_filter(const LabeledDataset& d, const FeatureSelection& sel, double alpha_su,
                             const BinningRule& rule) {
  if (alpha_su <= 0.0 || alpha_su > 1.0) throw ConfigError("alpha_su must lie in (0,1]");
  std::vector<bool> dropped(sel.kept.size(), false);
  // importance order: the stronger feature eliminates weaker redundant ones
  for (std::size_t a = 0; a < sel.kept.size(); ++a) {
    if (dropped[a]) continue;
    for (std::size_t b = a + 1; b < sel.kept.size(); ++b) {
      if (dropped[b]) continue;
      double su = symmetrical_uncertainty(d.features.col(sel.kept[a]),
                                          d.features.col(sel.kept[b]), rule);
      if (su > alpha_su) dropped[b] = true;
    }
  }
  FeatureSelection out;
  for (std::size_t i = 0; i < sel.kept.size(); ++i) {
    if (dropped[i]) continue;
    out.kept.push_back(sel.kept[i]);
    out.importance.push_back(sel.importance[i]);
    out.kept_names.push_back(sel.kept_names[i]);
  }
  require(!out.kept.empty(), "redundancy filter removed every feature");
  return out;
}

}  // namespace tids
