#ifndef TIDS_GP_HPP
#define TIDS_GP_HPP

#include <Eigen/Cholesky>
#include <utility>

#include "tids/dataset.hpp"
#include "tids/search_space.hpp"

namespace tids {

// Matern-5/2 covariance over scaled distances
double matern52(double r);

// Gaussian process regressor used as the optimizer surrogate; inputs live in
// the unit cube, outputs are standardized by the caller
class GpSurrogate {
public:
  void fit(const Matrix& x, const Vector& y, double length_scale, double signal_variance,
           double noise_variance);
  // picks hyperparameters by marginal likelihood over a small grid
  void fit_auto(const Matrix& x, const Vector& y);

  // posterior mean and variance of the latent function at a point
  std::pair<double, double> predict(const Vector& x) const;

  double length_scale() const { return length_scale_; }
  double signal_variance() const { return signal_variance_; }
  double noise_variance() const { return noise_variance_; }
  double log_marginal_likelihood() const { return lml_; }

private:
  Matrix x_;
  Vector alpha_;
  Eigen::LLT<Matrix> llt_;
  double length_scale_ = 1.0;
  double signal_variance_ = 1.0;
  double noise_variance_ = 1e-6;
  double lml_ = 0.0;
};

// expected improvement for minimization
double expected_improvement(double mean, double variance, double best, double xi = 0.01);

// surrogate-guided minimization: quasi-random start-up, then expected
// improvement over candidate points. spaces with conditional edges are
// rejected; failed trials are imputed with the worst observed objective.
OptResult bo_gp_optimize(const Objective& objective, const SearchSpace& space, int budget,
                         std::uint64_t seed);

}  // namespace tids

#endif
