#include "tids/gp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>

#include "tids/errors.hpp"

namespace tids {

double matern52(double r) {
  double s = std::sqrt(5.0) * r;
  return (1.0 + s + 5.0 * r * r / 3.0) * std::exp(-s);
}

namespace {

Matrix kernel_matrix(const Matrix& x, double ell, double signal, double noise) {
  const Eigen::Index n = x.rows();
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      double r = (x.row(i) - x.row(j)).norm() / ell;
      double v = signal * matern52(r);
      k(i, j) = v;
      k(j, i) = v;
    }
    k(i, i) += noise;
  }
  return k;
}

}  // namespace

void GpSurrogate::fit(const Matrix& x, const Vector& y, double length_scale,
                      double signal_variance, double noise_variance) {
  if (x.rows() != y.size()) throw InternalError("surrogate input row mismatch");
  if (x.rows() == 0) throw InternalError("surrogate needs observations");
  x_ = x;
  length_scale_ = length_scale;
  signal_variance_ = signal_variance;
  noise_variance_ = noise_variance;
  Matrix k = kernel_matrix(x_, length_scale_, signal_variance_, noise_variance_);
  llt_.compute(k);
  if (llt_.info() != Eigen::Success) {
    // lift the diagonal until the factorization goes through
    double jitter = 1e-10;
    while (llt_.info() != Eigen::Success && jitter < 1.0) {
      Matrix kj = k + jitter * Matrix::Identity(k.rows(), k.cols());
      llt_.compute(kj);
      jitter *= 10.0;
    }
    if (llt_.info() != Eigen::Success) throw InternalError("kernel factorization failed");
  }
  alpha_ = llt_.solve(y);
  const auto n = static_cast<double>(x_.rows());
  Matrix lower = llt_.matrixL();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < lower.rows(); ++i) log_det += std::log(lower(i, i));
  lml_ = -0.5 * y.dot(alpha_) - log_det - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

void GpSurrogate::fit_auto(const Matrix& x, const Vector& y) {
  static constexpr double kLengthGrid[] = {0.05, 0.1, 0.2, 0.35, 0.6, 1.0, 2.0};
  static constexpr double kNoiseGrid[] = {1e-6, 1e-4, 1e-2};
  double best_lml = -std::numeric_limits<double>::infinity();
  double best_ell = 0.35, best_noise = 1e-4;
  for (double ell : kLengthGrid) {
    for (double noise : kNoiseGrid) {
      fit(x, y, ell, 1.0, noise);
      if (lml_ > best_lml) {
        best_lml = lml_;
        best_ell = ell;
        best_noise = noise;
      }
    }
  }
  fit(x, y, best_ell, 1.0, best_noise);
}

std::pair<double, double> GpSurrogate::predict(const Vector& x) const {
  const Eigen::Index n = x_.rows();
  Vector k(n);
  for (Eigen::Index i = 0; i < n; ++i)
    k(i) = signal_variance_ * matern52((x_.row(i).transpose() - x).norm() / length_scale_);
  double mean = k.dot(alpha_);
  Vector v = llt_.matrixL().solve(k);
  double var = signal_variance_ - v.squaredNorm();
  return {mean, std::max(var, 0.0)};
}

double expected_improvement(double mean, double variance, double best, double xi) {
  double sigma = std::sqrt(std::max(variance, 1e-18));
  double gap = best - mean - xi;
  double z = gap / sigma;
  double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  double ei = gap * cdf + sigma * pdf;
  return ei > 0.0 ? ei : 0.0;
}

namespace {

// encode/decode between assignments and the unit cube
struct CubeCodec {
  const SearchSpace& space;

  std::size_t dims() const { return space.params().size(); }

  double to_unit(const ParamSpec& p, const ParamValue& v) const {
    switch (p.kind) {
      case ParamSpec::Kind::Integer: {
        auto iv = static_cast<double>(std::get<std::int64_t>(v));
        if (p.log_scale)
          return (std::log(iv) - std::log(p.lo)) / std::max(std::log(p.hi) - std::log(p.lo), 1e-12);
        return p.hi > p.lo ? (iv - p.lo) / (p.hi - p.lo) : 0.5;
      }
      case ParamSpec::Kind::Real: {
        double rv = std::get<double>(v);
        if (p.log_scale)
          return (std::log(rv) - std::log(p.lo)) / std::max(std::log(p.hi) - std::log(p.lo), 1e-12);
        return p.hi > p.lo ? (rv - p.lo) / (p.hi - p.lo) : 0.5;
      }
      default: {
        const auto& s = std::get<std::string>(v);
        auto it = std::find(p.categories.begin(), p.categories.end(), s);
        auto idx = static_cast<double>(it - p.categories.begin());
        return p.categories.size() > 1 ? idx / static_cast<double>(p.categories.size() - 1) : 0.5;
      }
    }
  }

  Vector encode(const Assignment& a) const {
    Vector u(static_cast<Eigen::Index>(dims()));
    for (std::size_t d = 0; d < dims(); ++d)
      u(static_cast<Eigen::Index>(d)) = to_unit(space.params()[d], a.values.at(space.params()[d].name));
    return u;
  }

  Assignment decode(const Vector& u) const {
    Assignment a;
    for (std::size_t d = 0; d < dims(); ++d) {
      const ParamSpec& p = space.params()[d];
      double t = std::clamp(u(static_cast<Eigen::Index>(d)), 0.0, 1.0);
      switch (p.kind) {
        case ParamSpec::Kind::Integer: {
          double raw = p.log_scale
                           ? std::exp(std::log(p.lo) + t * (std::log(p.hi) - std::log(p.lo)))
                           : p.lo + t * (p.hi - p.lo);
          auto v = static_cast<std::int64_t>(std::llround(raw));
          v = std::clamp(v, static_cast<std::int64_t>(p.lo), static_cast<std::int64_t>(p.hi));
          a.values[p.name] = v;
          break;
        }
        case ParamSpec::Kind::Real: {
          double v = p.log_scale
                         ? std::exp(std::log(p.lo) + t * (std::log(p.hi) - std::log(p.lo)))
                         : p.lo + t * (p.hi - p.lo);
          a.values[p.name] = std::clamp(v, p.lo, p.hi);
          break;
        }
        default: {
          auto idx = static_cast<std::size_t>(
              std::llround(t * static_cast<double>(p.categories.size() - 1)));
          idx = std::min(idx, p.categories.size() - 1);
          a.values[p.name] = p.categories[idx];
          break;
        }
      }
    }
    return a;
  }
};

double run_trial(const Objective& objective, const Assignment& a, Trial& t) {
  auto start = std::chrono::steady_clock::now();
  t.assignment = a;
  try {
    t.objective = objective(a);
    if (std::isnan(t.objective)) t.failed = true;
  } catch (const std::exception&) {
    t.failed = true;
    t.objective = std::numeric_limits<double>::quiet_NaN();
  }
  t.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return t.objective;
}

// worst finite objective, used to impute failed trials
double worst_objective(const std::vector<Trial>& trials) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& t : trials)
    if (!t.failed && t.objective > worst) worst = t.objective;
  return worst;
}

Trial pick_best(const std::vector<Trial>& trials) {
  const Trial* best = nullptr;
  for (const auto& t : trials) {
    if (t.failed) continue;
    if (!best || t.objective < best->objective) best = &t;
  }
  if (!best) throw DataError("every optimization trial failed");
  return *best;
}

}  // namespace

OptResult bo_gp_optimize(const Objective& objective, const SearchSpace& space, int budget,
                         std::uint64_t seed) {
  if (budget < 1) throw ConfigError("optimizer budget must be positive");
  if (space.params().empty()) throw ConfigError("search space is empty");
  if (space.has_conditionals())
    throw ConfigError("the surrogate optimizer does not accept conditional parameters");

  CubeCodec codec{space};
  OptResult res;
  std::set<std::string> seen;
  Rng rng(mix_seed(seed, 0xb09c));

  auto evaluate = [&](const Assignment& a) {
    Trial t;
    t.index = res.trials.size();
    run_trial(objective, a, t);
    res.trials.push_back(t);
    seen.insert(a.describe());
  };

  const std::size_t space_points = space.finite_size();
  if (space_points == 1) {
    evaluate(space.sample(rng));
    res.best = pick_best(res.trials);
    return res;
  }

  // enumerate small discrete spaces outright as the candidate pool
  std::vector<Assignment> pool;
  if (space_points > 0 && space_points <= 4096) {
    pool.reserve(space_points);
    for (std::size_t n = 0; n < space_points; ++n) {
      Assignment a;
      std::size_t rem = n;
      for (const auto& p : space.params()) {
        std::size_t options = p.kind == ParamSpec::Kind::Integer
                                  ? static_cast<std::size_t>(p.hi - p.lo) + 1
                                  : p.categories.size();
        std::size_t pick = rem % options;
        rem /= options;
        if (p.kind == ParamSpec::Kind::Integer)
          a.values[p.name] = static_cast<std::int64_t>(p.lo) + static_cast<std::int64_t>(pick);
        else
          a.values[p.name] = p.categories[pick];
      }
      pool.push_back(std::move(a));
    }
  }

  // quasi-random start-up trials
  int init = std::min(5, budget);
  std::uint64_t halton_cursor = 0;
  int made = 0, attempts = 0;
  while (made < init && attempts < 200 * init) {
    ++attempts;
    Vector u(static_cast<Eigen::Index>(codec.dims()));
    for (std::size_t d = 0; d < codec.dims(); ++d)
      u(static_cast<Eigen::Index>(d)) = halton(halton_cursor, static_cast<unsigned>(d));
    ++halton_cursor;
    Assignment a = codec.decode(u);
    if (seen.count(a.describe())) continue;
    evaluate(a);
    ++made;
  }
  while (made < init) {  // tiny discrete spaces may exhaust the sequence
    Assignment a = space.sample(rng);
    if (seen.count(a.describe())) break;
    evaluate(a);
    ++made;
  }

  while (res.trials.size() < static_cast<std::size_t>(budget)) {
    // assemble observation matrix with failed trials imputed as the worst value
    double worst = worst_objective(res.trials);
    if (!std::isfinite(worst)) worst = 0.0;
    Matrix xs(static_cast<Eigen::Index>(res.trials.size()),
              static_cast<Eigen::Index>(codec.dims()));
    Vector ys(static_cast<Eigen::Index>(res.trials.size()));
    for (std::size_t i = 0; i < res.trials.size(); ++i) {
      xs.row(static_cast<Eigen::Index>(i)) = codec.encode(res.trials[i].assignment).transpose();
      ys(static_cast<Eigen::Index>(i)) = res.trials[i].failed ? worst : res.trials[i].objective;
    }
    double mean = ys.mean();
    double sd = std::sqrt((ys.array() - mean).square().sum() /
                          static_cast<double>(std::max<Eigen::Index>(ys.size(), 1)));
    if (sd <= 0.0) sd = 1.0;
    Vector ys_std = (ys.array() - mean) / sd;

    GpSurrogate gp;
    gp.fit_auto(xs, ys_std);
    double best_std = ys_std.minCoeff();

    // candidate set: enumerated pool, or quasi-random plus local moves
    std::vector<Assignment> cands;
    if (!pool.empty()) {
      for (const auto& a : pool)
        if (!seen.count(a.describe())) cands.push_back(a);
      if (cands.empty()) break;  // space exhausted
    } else {
      Eigen::Index best_row = 0;
      ys.minCoeff(&best_row);
      Vector incumbent = xs.row(best_row).transpose();
      for (int c = 0; c < 256; ++c) {
        Vector u(static_cast<Eigen::Index>(codec.dims()));
        for (std::size_t d = 0; d < codec.dims(); ++d)
          u(static_cast<Eigen::Index>(d)) = halton(halton_cursor, static_cast<unsigned>(d));
        ++halton_cursor;
        cands.push_back(codec.decode(u));
      }
      for (int c = 0; c < 64; ++c) {
        Vector u = incumbent;
        for (Eigen::Index d = 0; d < u.size(); ++d)
          u(d) = std::clamp(u(d) + 0.08 * rng.gaussian(), 0.0, 1.0);
        cands.push_back(codec.decode(u));
      }
    }

    double best_ei = -1.0;
    std::size_t best_c = 0;
    for (std::size_t c = 0; c < cands.size(); ++c) {
      bool dup = !pool.empty() ? false : seen.count(cands[c].describe()) > 0;
      if (dup) continue;
      auto [mu, var] = gp.predict(codec.encode(cands[c]));
      double ei = expected_improvement(mu, var, best_std);
      if (ei > best_ei) {
        best_ei = ei;
        best_c = c;
      }
    }
    if (best_ei < 0.0) {
      Assignment a = space.sample(rng);
      evaluate(a);
      continue;
    }
    evaluate(cands[best_c]);
  }

  res.best = pick_best(res.trials);
  return res;
}

}  // namespace tids
