#include "tids/scaler.hpp"

#include <cmath>

#include "tids/errors.hpp"

namespace tids {

ZScoreScaler zscore_fit(const Matrix& x) {
  if (x.rows() == 0) throw DataError("cannot fit scaler on empty matrix");
  ZScoreScaler s;
  s.mean = x.colwise().mean();
  s.stddev.resize(x.cols());
  const auto n = static_cast<double>(x.rows());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    double acc = (x.col(j).array() - s.mean(j)).square().sum();
    s.stddev(j) = std::sqrt(acc / n);
  }
  return s;
}

Matrix zscore_apply(const ZScoreScaler& s, const Matrix& x) {
  if (x.cols() != s.mean.size())
    throw DataError("scaler width mismatch: expected " + std::to_string(s.mean.size()) +
                    " columns, got " + std::to_string(x.cols()));
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (s.stddev(j) == 0.0)
      out.col(j).setZero();
    else
      out.col(j) = (x.col(j).array() - s.mean(j)) / s.stddev(j);
  }
  return out;
}

Vector zscore_apply_row(const ZScoreScaler& s, const Vector& row) {
  if (row.size() != s.mean.size())
    throw DataError("scaler width mismatch: expected " + std::to_string(s.mean.size()) +
                    " values, got " + std::to_string(row.size()));
  Vector out(row.size());
  for (Eigen::Index j = 0; j < row.size(); ++j)
    out(j) = s.stddev(j) == 0.0 ? 0.0 : (row(j) - s.mean(j)) / s.stddev(j);
  return out;
}

std::pair<ZScoreScaler, Matrix> zscore_fit_apply(const Matrix& x) {
  ZScoreScaler s = zscore_fit(x);
  return {s, zscore_apply(s, x)};
}

}  // namespace tids
