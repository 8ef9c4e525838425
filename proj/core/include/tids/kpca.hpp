#ifndef TIDS_KPCA_HPP
#define TIDS_KPCA_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tids/dataset.hpp"

namespace tids {

enum class KernelKind { Rbf, Polynomial, Linear };

KernelKind kernel_from_name(const std::string& name);
const char* kernel_name(KernelKind k);

struct KpcaConfig {
  KernelKind kernel = KernelKind::Rbf;
  double gamma = 0.0;  // rbf width, 0 picks 1/n_features
  int degree = 3;      // polynomial degree
  double coef0 = 1.0;  // polynomial offset
  int components = 8;
  std::size_t max_fit_rows = 2000;  // larger fits use a seeded row subsample
  std::uint64_t seed = 0;
};

// kernel principal components: eigenvectors of the centered kernel matrix,
// scaled so projections are unit-variance-free inner products. eigenvector
// signs are fixed so each vector's largest-magnitude entry is positive.
struct KpcaModel {
  KernelKind kernel = KernelKind::Rbf;
  double gamma = 0.0;
  int degree = 3;
  double coef0 = 1.0;
  Matrix rows;        // fit rows, m x f
  Matrix alphas;      // m x p scaled eigenvectors
  Vector eigenvalues; // p, descending
  Vector row_mean;    // per-row mean of the uncentered kernel matrix
  double grand_mean = 0.0;

  int components() const { return static_cast<int>(alphas.cols()); }
};

KpcaModel kpca_fit(const Matrix& x, const KpcaConfig& cfg,
                   std::vector<std::string>* warnings = nullptr, Matrix* fitted = nullptr);

Matrix kpca_transform(const KpcaModel& m, const Matrix& x);
Vector kpca_transform_row(const KpcaModel& m, const Vector& row);

}  // namespace tids

#endif
