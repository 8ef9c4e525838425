#include "tids/tpe.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "tids/errors.hpp"

namespace tids {

namespace {

constexpr double kMinBandwidthFactor = 1e-3;

// Parzen mixture over observed numeric values plus one uniform component
struct NumericDensity {
  double lo = 0.0, hi = 1.0;  // transformed bounds
  bool log_scale = false;
  std::vector<double> mu;
  std::vector<double> bw;

  double transform(double v) const { return log_scale ? std::log(v) : v; }
  double back(double t) const { return log_scale ? std::exp(t) : t; }

  void build(std::vector<double> values, double lo_raw, double hi_raw, bool log) {
    log_scale = log;
    lo = log ? std::log(lo_raw) : lo_raw;
    hi = log ? std::log(hi_raw) : hi_raw;
    for (auto& v : values) v = transform(v);
    std::sort(values.begin(), values.end());
    mu = values;
    double range = std::max(hi - lo, 1e-12);
    bw.resize(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
      double left = i > 0 ? mu[i] - mu[i - 1] : range;
      double right = i + 1 < mu.size() ? mu[i + 1] - mu[i] : range;
      double w = std::max(left, right);
      if (mu.size() == 1) w = range / 2.0;
      bw[i] = std::clamp(w, kMinBandwidthFactor * range, range);
    }
  }

  double pdf(double raw) const {
    double t = transform(raw);
    double range = std::max(hi - lo, 1e-12);
    double weight = 1.0 / static_cast<double>(mu.size() + 1);
    double acc = weight / range;  // uniform component keeps the ratio finite
    for (std::size_t i = 0; i < mu.size(); ++i) {
      double z = (t - mu[i]) / bw[i];
      acc += weight * std::exp(-0.5 * z * z) / (bw[i] * std::sqrt(2.0 * std::numbers::pi));
    }
    return acc;
  }

  double sample(Rng& rng) const {
    std::size_t comp = static_cast<std::size_t>(rng.below(mu.size() + 1));
    double t;
    if (comp == mu.size()) {
      t = rng.uniform(lo, hi);
    } else {
      t = mu[comp] + bw[comp] * rng.gaussian();
      t = std::clamp(t, lo, hi);
    }
    return back(t);
  }
};

// smoothed category counts
struct CategoricalDensity {
  std::vector<double> weight;

  void build(const std::vector<std::size_t>& counts) {
    weight.resize(counts.size());
    double total = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      weight[i] = static_cast<double>(counts[i]) + 1.0;
      total += weight[i];
    }
    for (auto& w : weight) w /= total;
  }

  double pdf(std::size_t idx) const { return weight[idx]; }

  std::size_t sample(Rng& rng) const {
    double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < weight.size(); ++i) {
      acc += weight[i];
      if (u <= acc) return i;
    }
    return weight.size() - 1;
  }
};

struct ParamDensity {
  bool is_categorical = false;
  NumericDensity numeric;
  CategoricalDensity categorical;
};

double raw_value(const ParamSpec& p, const ParamValue& v) {
  if (p.kind == ParamSpec::Kind::Integer)
    return static_cast<double>(std::get<std::int64_t>(v));
  return std::get<double>(v);
}

ParamDensity build_density(const SearchSpace& space, const ParamSpec& p,
                           const std::vector<const Trial*>& side) {
  ParamDensity d;
  if (p.kind == ParamSpec::Kind::Categorical) {
    d.is_categorical = true;
    std::vector<std::size_t> counts(p.categories.size(), 0);
    for (const Trial* t : side) {
      auto it = t->assignment.values.find(p.name);
      if (it == t->assignment.values.end()) continue;
      const auto& s = std::get<std::string>(it->second);
      auto pos = std::find(p.categories.begin(), p.categories.end(), s);
      if (pos != p.categories.end())
        ++counts[static_cast<std::size_t>(pos - p.categories.begin())];
    }
    d.categorical.build(counts);
  } else {
    std::vector<double> values;
    for (const Trial* t : side) {
      auto it = t->assignment.values.find(p.name);
      if (it == t->assignment.values.end()) continue;
      values.push_back(raw_value(p, it->second));
    }
    d.numeric.build(std::move(values), p.lo, p.hi, p.log_scale);
  }
  (void)space;
  return d;
}

double density_log_pdf(const ParamDensity& d, const ParamSpec& p, const ParamValue& v) {
  if (d.is_categorical) {
    const auto& s = std::get<std::string>(v);
    auto pos = std::find(p.categories.begin(), p.categories.end(), s);
    auto idx = static_cast<std::size_t>(pos - p.categories.begin());
    return std::log(std::max(d.categorical.pdf(idx), 1e-300));
  }
  return std::log(std::max(d.numeric.pdf(raw_value(p, v)), 1e-300));
}

ParamValue density_sample(const ParamDensity& d, const ParamSpec& p, Rng& rng) {
  if (d.is_categorical) return p.categories[d.categorical.sample(rng)];
  double v = d.numeric.sample(rng);
  if (p.kind == ParamSpec::Kind::Integer) {
    auto iv = static_cast<std::int64_t>(std::llround(v));
    iv = std::clamp(iv, static_cast<std::int64_t>(p.lo), static_cast<std::int64_t>(p.hi));
    return iv;
  }
  return std::clamp(v, p.lo, p.hi);
}

double imputed_objective(const std::vector<Trial>& history, const Trial& t) {
  if (!t.failed) return t.objective;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& h : history)
    if (!h.failed && h.objective > worst) worst = h.objective;
  return std::isfinite(worst) ? worst : 0.0;
}

}  // namespace

TpeProposal tpe_propose(const std::vector<Trial>& history, const SearchSpace& space,
                        const TpeOptions& opts, Rng& rng) {
  if (history.size() < 2) throw InternalError("density split needs at least 2 trials");

  // order by (imputed) objective and cut at the gamma quantile; both sides
  // stay non-empty by construction
  std::vector<const Trial*> order;
  order.reserve(history.size());
  for (const auto& t : history) order.push_back(&t);
  std::vector<double> value(history.size());
  for (std::size_t i = 0; i < history.size(); ++i)
    value[i] = imputed_objective(history, history[i]);
  std::stable_sort(order.begin(), order.end(), [&](const Trial* a, const Trial* b) {
    return value[a - history.data()] < value[b - history.data()];
  });
  auto n_good = static_cast<std::size_t>(
      std::max(1.0, std::floor(opts.gamma * static_cast<double>(history.size()) + 0.5)));
  if (n_good >= history.size()) n_good = history.size() - 1;
  std::vector<const Trial*> good(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_good));
  std::vector<const Trial*> bad(order.begin() + static_cast<std::ptrdiff_t>(n_good), order.end());

  // per-parameter densities from the trials where the parameter was active
  std::vector<ParamDensity> l_dens, g_dens;
  for (const auto& p : space.params()) {
    std::vector<const Trial*> l_side, g_side;
    for (const Trial* t : good)
      if (t->assignment.has(p.name)) l_side.push_back(t);
    for (const Trial* t : bad)
      if (t->assignment.has(p.name)) g_side.push_back(t);
    l_dens.push_back(build_density(space, p, l_side));
    g_dens.push_back(build_density(space, p, g_side));
  }

  TpeProposal prop;
  for (int c = 0; c < opts.n_candidates; ++c) {
    Assignment a;
    double score = 0.0;
    for (std::size_t d = 0; d < space.params().size(); ++d) {
      const ParamSpec& p = space.params()[d];
      if (!space.is_active(p, a)) continue;
      ParamValue v = density_sample(l_dens[d], p, rng);
      score += density_log_pdf(l_dens[d], p, v) - density_log_pdf(g_dens[d], p, v);
      a.values[p.name] = std::move(v);
    }
    prop.candidates.push_back(std::move(a));
    prop.score.push_back(score);
  }
  prop.chosen = 0;
  for (std::size_t c = 1; c < prop.score.size(); ++c)
    if (prop.score[c] > prop.score[prop.chosen]) prop.chosen = c;
  return prop;
}

OptResult bo_tpe_optimize(const Objective& objective, const SearchSpace& space, int budget,
                          std::uint64_t seed, const TpeOptions& opts) {
  if (budget < 1) throw ConfigError("optimizer budget must be positive");
  if (space.params().empty()) throw ConfigError("search space is empty");

  OptResult res;
  Rng rng(mix_seed(seed, 0x79e5));

  auto evaluate = [&](const Assignment& a) {
    space.validate(a);
    Trial t;
    t.index = res.trials.size();
    auto start = std::chrono::steady_clock::now();
    t.assignment = a;
    try {
      t.objective = objective(a);
      if (std::isnan(t.objective)) t.failed = true;
    } catch (const std::exception&) {
      t.failed = true;
      t.objective = std::numeric_limits<double>::quiet_NaN();
    }
    t.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    res.trials.push_back(std::move(t));
  };

  int init = std::min(std::max(opts.init, 2), budget);
  for (int i = 0; i < init; ++i) evaluate(space.sample(rng));

  while (res.trials.size() < static_cast<std::size_t>(budget)) {
    TpeProposal prop = tpe_propose(res.trials, space, opts, rng);
    evaluate(prop.candidates[prop.chosen]);
  }

  const Trial* best = nullptr;
  for (const auto& t : res.trials) {
    if (t.failed) continue;
    if (!best || t.objective < best->objective) best = &t;
  }
  if (!best) throw DataError("every optimization trial failed");
  res.best = *best;
  return res;
}

}  // namespace tids
