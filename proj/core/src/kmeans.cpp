#include "tids/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tids/errors.hpp"
#include "tids/gp.hpp"
#include "tids/parallel.hpp"
#include "tids/rng.hpp"
#include "tids/search_space.hpp"

namespace tids {

const char* distance_name(Distance d) {
  return d == Distance::Euclidean ? "euclidean" : "manhattan";
}

Distance distance_from_name(const std::string& name) {
  if (name == "euclidean") return Distance::Euclidean;
  if (name == "manhattan") return Distance::Manhattan;
  throw ConfigError("unknown distance: " + name);
}

double point_distance(Distance d, const Vector& a, const Vector& b) {
  if (d == Distance::Euclidean) return (a - b).squaredNorm();
  return (a - b).cwiseAbs().sum();
}

namespace {

double row_centroid_distance(Distance d, const Matrix& x, Eigen::Index i, const Matrix& c,
                             Eigen::Index j) {
  if (d == Distance::Euclidean) return (x.row(i) - c.row(j)).squaredNorm();
  return (x.row(i) - c.row(j)).cwiseAbs().sum();
}

// distance-weighted seeding: each next centroid drawn proportional to the
// current distance of every point to its nearest chosen centroid
Matrix seed_centroids(const Matrix& x, int k, Distance d, Rng& rng) {
  const Eigen::Index n = x.rows();
  Matrix centroids(k, x.cols());
  Eigen::Index first = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
  centroids.row(0) = x.row(first);
  std::vector<double> best(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index i = 0; i < n; ++i)
    best[static_cast<std::size_t>(i)] = row_centroid_distance(d, x, i, centroids, 0);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double w : best) total += w;
    Eigen::Index pick;
    if (total <= 0.0) {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    } else {
      double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += best[static_cast<std::size_t>(i)];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    }
    centroids.row(c) = x.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      double dist = row_centroid_distance(d, x, i, centroids, c);
      auto& slot = best[static_cast<std::size_t>(i)];
      if (dist < slot) slot = dist;
    }
  }
  return centroids;
}

std::vector<int> assign_all(const Matrix& x, const Matrix& centroids, Distance d,
                            std::vector<double>* dists = nullptr) {
  const Eigen::Index n = x.rows();
  std::vector<int> assign(static_cast<std::size_t>(n), 0);
  if (dists) dists->assign(static_cast<std::size_t>(n), 0.0);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
    auto i = static_cast<Eigen::Index>(ii);
    double best = std::numeric_limits<double>::infinity();
    int bj = 0;
    for (Eigen::Index j = 0; j < centroids.rows(); ++j) {
      double dist = row_centroid_distance(d, x, i, centroids, j);
      if (dist < best) {
        best = dist;
        bj = static_cast<int>(j);
      }
    }
    assign[ii] = bj;
    if (dists) (*dists)[ii] = best;
  });
  return assign;
}

// mean for euclidean, coordinate-wise median for manhattan; either choice
// keeps the matching objective from increasing
void update_centroids(const Matrix& x, const std::vector<int>& assign, Distance d,
                      Matrix& centroids) {
  const int k = static_cast<int>(centroids.rows());
  if (d == Distance::Euclidean) {
    Matrix sums = Matrix::Zero(k, x.cols());
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += x.row(i);
      ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
    }
    for (int j = 0; j < k; ++j)
      if (counts[static_cast<std::size_t>(j)] > 0)
        centroids.row(j) = sums.row(j) / static_cast<double>(counts[static_cast<std::size_t>(j)]);
  } else {
    std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      members[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])].push_back(i);
    std::vector<double> col;
    for (int j = 0; j < k; ++j) {
      const auto& rows = members[static_cast<std::size_t>(j)];
      if (rows.empty()) continue;
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        col.clear();
        for (Eigen::Index i : rows) col.push_back(x(i, c));
        std::sort(col.begin(), col.end());
        std::size_t m = col.size();
        centroids(j, c) = (m % 2 == 1) ? col[m / 2] : 0.5 * (col[m / 2 - 1] + col[m / 2]);
      }
    }
  }
}

// move every empty cluster's centroid onto the point farthest from its
// assigned centroid, which strictly lowers the objective
bool fix_empty_clusters(const Matrix& x, std::vector<int>& assign, Matrix& centroids, Distance d) {
  const int k = static_cast<int>(centroids.rows());
  std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
  for (int a : assign) ++counts[static_cast<std::size_t>(a)];
  bool changed = false;
  for (int j = 0; j < k; ++j) {
    if (counts[static_cast<std::size_t>(j)] > 0) continue;
    double worst = -1.0;
    Eigen::Index far_row = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      double dist = row_centroid_distance(d, x, i, centroids, assign[static_cast<std::size_t>(i)]);
      if (dist > worst) {
        worst = dist;
        far_row = i;
      }
    }
    centroids.row(j) = x.row(far_row);
    --counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(far_row)])];
    assign[static_cast<std::size_t>(far_row)] = j;
    counts[static_cast<std::size_t>(j)] = 1;
    changed = true;
  }
  return changed;
}

void fit_full_batch(const Matrix& x, Distance d, const KMeansOptions& opts, KMeansModel& model) {
  Matrix& centroids = model.centroids;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    std::vector<double> dists;
    std::vector<int> assign = assign_all(x, centroids, d, &dists);
    fix_empty_clusters(x, assign, centroids, d);
    double objective = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      objective += row_centroid_distance(d, x, i, centroids, assign[static_cast<std::size_t>(i)]);
    model.objective_trace.push_back(objective);
    Matrix before = centroids;
    update_centroids(x, assign, d, centroids);
    double shift = 0.0;
    for (Eigen::Index j = 0; j < centroids.rows(); ++j)
      shift = std::max(shift, (centroids.row(j) - before.row(j)).norm());
    if (shift < opts.tol) break;
  }
}

void fit_minibatch(const Matrix& x, Distance d, const KMeansOptions& opts, KMeansModel& model,
                   Rng& rng) {
  Matrix& centroids = model.centroids;
  const auto n = static_cast<std::uint64_t>(x.rows());
  const std::size_t batch = std::min<std::size_t>(opts.minibatch, static_cast<std::size_t>(n));
  std::vector<double> counts(static_cast<std::size_t>(centroids.rows()), 0.0);
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    Matrix before = centroids;
    for (std::size_t b = 0; b < batch; ++b) {
      auto i = static_cast<Eigen::Index>(rng.below(n));
      double best = std::numeric_limits<double>::infinity();
      int bj = 0;
      for (Eigen::Index j = 0; j < centroids.rows(); ++j) {
        double dist = row_centroid_distance(d, x, i, centroids, j);
        if (dist < best) {
          best = dist;
          bj = static_cast<int>(j);
        }
      }
      auto& cnt = counts[static_cast<std::size_t>(bj)];
      cnt += 1.0;
      double lr = 1.0 / cnt;
      centroids.row(bj) = (1.0 - lr) * centroids.row(bj) + lr * x.row(i);
    }
    double shift = 0.0;
    for (Eigen::Index j = 0; j < centroids.rows(); ++j)
      shift = std::max(shift, (centroids.row(j) - before.row(j)).norm());
    if (shift < opts.tol) break;
  }
  // make sure no cluster ends up empty on the fitted data
  std::vector<int> assign = assign_all(x, centroids, d);
  fix_empty_clusters(x, assign, centroids, d);
}

}  // namespace

KMeansModel kmeans_fit(const Matrix& x, int k, Distance distance, const KMeansOptions& opts) {
  if (k < 1) throw ConfigError("k must be positive");
  if (x.rows() < k)
    throw DataError("k-means needs at least k rows: k=" + std::to_string(k) + ", rows=" +
                    std::to_string(x.rows()));
  Rng rng(mix_seed(opts.seed, 0x6b6d));
  KMeansModel model;
  model.distance = distance;
  model.centroids = seed_centroids(x, k, distance, rng);
  if (opts.minibatch > 0 && opts.minibatch < static_cast<std::size_t>(x.rows()))
    fit_minibatch(x, distance, opts, model, rng);
  else
    fit_full_batch(x, distance, opts, model);
  model.inertia = kmeans_objective(model, x);
  return model;
}

int nearest_centroid(const KMeansModel& m, const Vector& row, double* dist_out) {
  if (row.size() != m.centroids.cols()) throw DataError("row width does not match centroids");
  double best = std::numeric_limits<double>::infinity();
  int bj = 0;
  for (Eigen::Index j = 0; j < m.centroids.rows(); ++j) {
    Vector c = m.centroids.row(j).transpose();
    double dist = point_distance(m.distance, row, c);
    if (dist < best) {
      best = dist;
      bj = static_cast<int>(j);
    }
  }
  if (dist_out) *dist_out = best;
  return bj;
}

std::vector<int> kmeans_assign(const KMeansModel& m, const Matrix& x) {
  if (x.cols() != m.centroids.cols()) throw DataError("matrix width does not match centroids");
  return assign_all(x, m.centroids, m.distance);
}

double kmeans_objective(const KMeansModel& m, const Matrix& x) {
  std::vector<double> dists;
  assign_all(x, m.centroids, m.distance, &dists);
  double total = 0.0;
  for (double v : dists) total += v;
  return total;
}

double silhouette(const Matrix& x, const std::vector<int>& assign, Distance distance) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (assign.size() != n) throw DataError("assignment length does not match rows");
  int k = 0;
  for (int a : assign) k = std::max(k, a + 1);
  if (k < 2) throw DataError("silhouette needs at least 2 clusters");
  std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
  for (int a : assign) {
    if (a < 0) throw DataError("negative cluster id");
    ++counts[static_cast<std::size_t>(a)];
  }
  for (std::size_t j = 0; j < counts.size(); ++j)
    if (counts[j] == 0) throw DataError("cluster " + std::to_string(j) + " is empty");

  std::vector<double> scores(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    std::vector<double> mean_dist(static_cast<std::size_t>(k), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      Vector a = x.row(static_cast<Eigen::Index>(i)).transpose();
      Vector b = x.row(static_cast<Eigen::Index>(j)).transpose();
      double dist = distance == Distance::Euclidean ? (a - b).norm() : (a - b).cwiseAbs().sum();
      mean_dist[static_cast<std::size_t>(assign[j])] += dist;
    }
    int own = assign[i];
    std::size_t own_count = counts[static_cast<std::size_t>(own)];
    if (own_count <= 1) {
      scores[i] = 0.0;
      return;
    }
    double a_i = mean_dist[static_cast<std::size_t>(own)] / static_cast<double>(own_count - 1);
    double b_i = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == own) continue;
      double m = mean_dist[static_cast<std::size_t>(c)] /
                 static_cast<double>(counts[static_cast<std::size_t>(c)]);
      b_i = std::min(b_i, m);
    }
    double denom = std::max(a_i, b_i);
    scores[i] = denom == 0.0 ? 0.0 : (b_i - a_i) / denom;
  });
  double total = 0.0;
  for (double s : scores) total += s;
  return total / static_cast<double>(n);
}

TuneKResult tune_k(const Matrix& x, int k_lo, int k_hi, int budget, Distance distance,
                   const KMeansOptions& opts, std::size_t eval_cap) {
  if (k_lo < 2) throw ConfigError("k range must start at 2 or above");
  if (k_hi < k_lo) throw ConfigError("empty k range");
  k_hi = std::min<int>(k_hi, static_cast<int>(x.rows()));
  if (k_hi < k_lo) throw DataError("not enough rows for the requested k range");

  // fixed evaluation subsample shared by every trial
  std::vector<std::size_t> eval_rows;
  if (static_cast<std::size_t>(x.rows()) > eval_cap) {
    Rng rng(mix_seed(opts.seed, 0xe7a1));
    eval_rows = rng.sample_without_replacement(static_cast<std::size_t>(x.rows()), eval_cap);
    std::sort(eval_rows.begin(), eval_rows.end());
  } else {
    eval_rows.resize(static_cast<std::size_t>(x.rows()));
    for (std::size_t i = 0; i < eval_rows.size(); ++i) eval_rows[i] = i;
  }
  Matrix eval(static_cast<Eigen::Index>(eval_rows.size()), x.cols());
  for (std::size_t i = 0; i < eval_rows.size(); ++i)
    eval.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(eval_rows[i]));

  SearchSpace space;
  space.add_int("k", k_lo, k_hi);
  auto objective = [&](const Assignment& a) {
    int k = static_cast<int>(a.get_int("k"));
    KMeansModel m = kmeans_fit(x, k, distance, opts);
    return -silhouette(eval, kmeans_assign(m, eval), distance);
  };
  OptResult res = bo_gp_optimize(objective, space, budget, opts.seed);
  int best_k = static_cast<int>(res.best.assignment.get_int("k"));
  TuneKResult out;
  out.k = best_k;
  out.model = kmeans_fit(x, best_k, distance, opts);
  out.score = -res.best.objective;
  return out;
}

LabeledDataset cluster_sample(const LabeledDataset& d, const KMeansModel& m, double fraction,
                              std::uint64_t seed) {
  if (fraction <= 0.0 || fraction > 1.0) throw ConfigError("sample fraction must lie in (0,1]");
  std::vector<int> assign = kmeans_assign(m, d.features);
  const auto k = static_cast<std::size_t>(m.centroids.rows());
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < assign.size(); ++i)
    members[static_cast<std::size_t>(assign[i])].push_back(i);
  Rng rng(mix_seed(seed, 0x5a3e));
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < k; ++c) {
    const auto& rows = members[c];
    if (rows.empty()) continue;
    auto want = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(rows.size()) - 1e-12));
    if (want > rows.size()) want = rows.size();
    if (want == 0) want = 1;
    auto picked = rng.sample_without_replacement(rows.size(), want);
    for (std::size_t p : picked) keep.push_back(rows[p]);
  }
  return d.take_rows(keep);
}

}  // namespace tids
