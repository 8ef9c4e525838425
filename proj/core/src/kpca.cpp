#include "tids/kpca.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "tids/errors.hpp"
#include "tids/rng.hpp"

namespace tids {

KernelKind kernel_from_name(const std::string& name) {
  if (name == "rbf") return KernelKind::Rbf;
  if (name == "poly" || name == "polynomial") return KernelKind::Polynomial;
  if (name == "linear") return KernelKind::Linear;
  throw ConfigError("unknown kernel: " + name);
}

const char* kernel_name(KernelKind k) {
  switch (k) {
    case KernelKind::Rbf: return "rbf";
    case KernelKind::Polynomial: return "poly";
    default: return "linear";
  }
}

namespace {

double kernel_value(const KpcaModel& m, const Vector& a, const Vector& b) {
  switch (m.kernel) {
    case KernelKind::Rbf:
      return std::exp(-m.gamma * (a - b).squaredNorm());
    case KernelKind::Polynomial:
      return std::pow(a.dot(b) + m.coef0, m.degree);
    default:
      return a.dot(b);
  }
}

}  // namespace

KpcaModel kpca_fit(const Matrix& x, const KpcaConfig& cfg, std::vector<std::string>* warnings,
                   Matrix* fitted) {
  if (x.rows() < 2) throw DataError("kernel pca needs at least 2 rows");
  if (cfg.components < 1) throw ConfigError("component count must be positive");

  KpcaModel m;
  m.kernel = cfg.kernel;
  m.gamma = cfg.gamma > 0.0 ? cfg.gamma : 1.0 / static_cast<double>(x.cols());
  m.degree = cfg.degree;
  m.coef0 = cfg.coef0;

  if (cfg.max_fit_rows > 0 && static_cast<std::size_t>(x.rows()) > cfg.max_fit_rows) {
    Rng rng(mix_seed(cfg.seed, 0x6bca));
    auto picked = rng.sample_without_replacement(static_cast<std::size_t>(x.rows()),
                                                 cfg.max_fit_rows);
    std::sort(picked.begin(), picked.end());
    m.rows.resize(static_cast<Eigen::Index>(picked.size()), x.cols());
    for (std::size_t i = 0; i < picked.size(); ++i)
      m.rows.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(picked[i]));
  } else {
    m.rows = x;
  }

  const Eigen::Index n = m.rows.rows();
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector ri = m.rows.row(i).transpose();
    for (Eigen::Index j = i; j < n; ++j) {
      Vector rj = m.rows.row(j).transpose();
      double v = kernel_value(m, ri, rj);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  m.row_mean = k.rowwise().mean();
  m.grand_mean = k.mean();
  Matrix centered = k;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      centered(i, j) = k(i, j) - m.row_mean(i) - m.row_mean(j) + m.grand_mean;

  Eigen::SelfAdjointEigenSolver<Matrix> solver(centered);
  if (solver.info() != Eigen::Success) throw InternalError("kernel matrix eigensolve failed");
  Vector evals = solver.eigenvalues();  // ascending
  const Matrix& evecs = solver.eigenvectors();

  double tol = std::max(1e-12, evals.cwiseAbs().maxCoeff() * 1e-12);
  int available = 0;
  for (Eigen::Index i = 0; i < evals.size(); ++i)
    if (evals(i) > tol) ++available;
  int p = cfg.components;
  if (p > available) {
    if (warnings)
      warnings->push_back("only " + std::to_string(available) +
                          " positive kernel components available, reduced from " +
                          std::to_string(p));
    p = available;
  }
  if (p < 1) throw DataError("centered kernel matrix has no positive components");

  m.alphas.resize(n, p);
  m.eigenvalues.resize(p);
  for (int c = 0; c < p; ++c) {
    Eigen::Index src = evals.size() - 1 - c;  // descending order
    double lambda = evals(src);
    Vector v = evecs.col(src);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    m.eigenvalues(c) = lambda;
    m.alphas.col(c) = v / std::sqrt(lambda);
  }

  if (fitted) {
    fitted->resize(n, p);
    for (int c = 0; c < p; ++c) {
      Eigen::Index src = evals.size() - 1 - c;
      Vector v = evecs.col(src);
      Eigen::Index arg = 0;
      v.cwiseAbs().maxCoeff(&arg);
      if (v(arg) < 0.0) v = -v;
      fitted->col(c) = std::sqrt(evals(src)) * v;
    }
  }
  return m;
}

Vector kpca_transform_row(const KpcaModel& m, const Vector& row) {
  if (row.size() != m.rows.cols())
    throw DataError("kernel pca width mismatch: expected " + std::to_string(m.rows.cols()) +
                    " values, got " + std::to_string(row.size()));
  const Eigen::Index n = m.rows.rows();
  Vector k(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector ri = m.rows.row(i).transpose();
    k(i) = kernel_value(m, row, ri);
  }
  double k_mean = k.mean();
  Vector centered(n);
  for (Eigen::Index i = 0; i < n; ++i)
    centered(i) = k(i) - k_mean - m.row_mean(i) + m.grand_mean;
  return m.alphas.transpose() * centered;
}

Matrix kpca_transform(const KpcaModel& m, const Matrix& x) {
  Matrix out(x.rows(), m.alphas.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    out.row(i) = kpca_transform_row(m, x.row(i).transpose()).transpose();
  return out;
}

}  // namespace tids
