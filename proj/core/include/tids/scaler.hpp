#ifndef TIDS_SCALER_HPP
#define TIDS_SCALER_HPP

#include <utility>

#include "tids/dataset.hpp"

namespace tids {

// column-wise standardization with population standard deviation
struct ZScoreScaler {
  Vector mean;
  Vector stddev;  // population sigma, zero allowed
};

ZScoreScaler zscore_fit(const Matrix& x);

// (x - mean) / sigma; columns with sigma == 0 map to 0
Matrix zscore_apply(const ZScoreScaler& s, const Matrix& x);
Vector zscore_apply_row(const ZScoreScaler& s, const Vector& row);

std::pair<ZScoreScaler, Matrix> zscore_fit_apply(const Matrix& x);

}  // namespace tids

#endif
