#ifndef TIDS_ANOMALY_HPP
#define TIDS_ANOMALY_HPP

#include <optional>
#include <string>
#include <vector>

#include "tids/kmeans.hpp"
#include "tids/search_space.hpp"
#include "tids/trees.hpp"

namespace tids {

// k-means whose clusters carry a majority label (0 normal / 1 attack) and the
// majority fraction as a routing confidence
struct ClusterLabelModel {
  KMeansModel km;
  std::vector<int> labels;     // per cluster
  std::vector<double> purity;  // majority fraction, in [0.5, 1]
  double p_star = 0.933;       // below this confidence a corrector decides
};

struct ClusterVerdict {
  int cluster = -1;
  int label = 0;
  double p = 0.0;
};

ClusterVerdict cluster_assign(const ClusterLabelModel& clm, const Vector& row);

ClusterLabelModel cl_kmeans_fit(const Matrix& x, const std::vector<int>& y01, int k,
                                Distance distance, const KMeansOptions& opts,
                                double p_star = 0.933);

struct AnomalyConfig {
  int k_lo = 8;
  int k_hi = 512;
  int gp_budget = 20;
  double p_star = 0.933;
  bool tune_p_star = false;
  int p_star_budget = 20;
  std::uint64_t seed = 0;
  int minibatch = 4096;
  int max_iter = 100;
  double holdout_fraction = 0.2;  // internal split scoring (k, distance) candidates
  bool enable_correctors = true;
  LearnerKind corrector_kind = LearnerKind::Bagging;
  TreeHyperparams corrector_hp;  // usually the signature tier's best-base setup
};

struct AnomalyModel {
  ClusterLabelModel clm;
  // trained on training-set misses (attacks that landed in normal clusters)
  // plus an equal count of normal rows; decides low-confidence normal clusters
  std::optional<EnsembleModel> fn_corrector;
  // trained on training-set false alarms plus an equal count of attack rows;
  // decides low-confidence attack clusters
  std::optional<EnsembleModel> fp_corrector;
};

struct AnomalyDiagnostics {
  std::vector<Trial> tuning_trials;
  std::vector<std::string> warnings;
  std::size_t fn_count = 0;
  std::size_t fp_count = 0;
  double validation_accuracy = 0.0;
  int chosen_k = 0;
  Distance chosen_distance = Distance::Euclidean;
};

AnomalyModel train_anomaly_tier(const Matrix& x, const std::vector<int>& y01,
                                const AnomalyConfig& cfg, AnomalyDiagnostics* diag = nullptr);

double corrector_attack_probability(const EnsembleModel& m, const Vector& row,
                                    std::size_t* node_visits = nullptr);

}  // namespace tids

#endif
