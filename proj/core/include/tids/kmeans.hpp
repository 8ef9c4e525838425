#ifndef TIDS_KMEANS_HPP
#define TIDS_KMEANS_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "tids/dataset.hpp"

namespace tids {

enum class Distance { Euclidean, Manhattan };

const char* distance_name(Distance d);
Distance distance_from_name(const std::string& name);

struct KMeansOptions {
  int max_iter = 100;
  double tol = 1e-4;
  std::uint64_t seed = 0;
  std::size_t minibatch = 0;  // 0 = full batch
};

struct KMeansModel {
  Matrix centroids;  // k x f
  Distance distance = Distance::Euclidean;
  double inertia = 0.0;                  // objective on the fitted data
  std::vector<double> objective_trace;   // per-iteration objective, full-batch mode only
};

// squared distance for euclidean, absolute-sum for manhattan
double point_distance(Distance d, const Vector& a, const Vector& b);

// centroids seeded with distance-weighted spreading, then alternating
// assign/update steps; empty clusters are reseeded from the farthest point
KMeansModel kmeans_fit(const Matrix& x, int k, Distance distance, const KMeansOptions& opts);

int nearest_centroid(const KMeansModel& m, const Vector& row, double* dist_out = nullptr);
std::vector<int> kmeans_assign(const KMeansModel& m, const Matrix& x);
double kmeans_objective(const KMeansModel& m, const Matrix& x);

// mean over rows of (b-a)/max(a,b); singleton clusters score 0, 0/0 maps to 0
double silhouette(const Matrix& x, const std::vector<int>& assign,
                  Distance distance = Distance::Euclidean);

struct TuneKResult {
  int k = 0;
  KMeansModel model;
  double score = 0.0;  // silhouette of the winner
};

// silhouette-guided search over k using the surrogate-based optimizer;
// silhouette is computed on a fixed row subsample of at most eval_cap rows
TuneKResult tune_k(const Matrix& x, int k_lo, int k_hi, int budget, Distance distance,
                   const KMeansOptions& opts, std::size_t eval_cap = 2000);

// keeps ceil(fraction * cluster size) uniformly sampled rows per cluster
LabeledDataset cluster_sample(const LabeledDataset& d, const KMeansModel& m, double fraction,
                              std::uint64_t seed);

}  // namespace tids

#endif
