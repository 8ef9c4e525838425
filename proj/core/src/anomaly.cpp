#include "tids/anomaly.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "tids/dataset.hpp"
#include "tids/errors.hpp"
#include "tids/gp.hpp"
#include "tids/rng.hpp"

namespace tids {

namespace {

LabeledDataset as_binary_dataset(const Matrix& x, const std::vector<int>& y01) {
  LabeledDataset d;
  d.features = x;
  d.labels = y01;
  d.class_names = {"normal", "attack"};
  d.attack_class = {0, 1};
  d.feature_names.resize(static_cast<std::size_t>(x.cols()));
  for (std::size_t c = 0; c < d.feature_names.size(); ++c) {
    d.feature_names[c] = "z" + std::to_string(c);
  }
  return d;
}

double labeling_accuracy(const ClusterLabelModel& clm, const Matrix& x,
                         const std::vector<int>& y01) {
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const ClusterVerdict v = cluster_assign(clm, x.row(i).transpose());
    if (v.label == y01[static_cast<std::size_t>(i)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(x.rows());
}

EnsembleModel train_corrector(const Matrix& x, const std::vector<int>& y01,
                              const std::vector<std::size_t>& error_rows, int error_label,
                              const AnomalyConfig& cfg, std::uint64_t stream,
                              std::vector<std::string>* warnings) {
  std::vector<std::size_t> counter_pool;
  const int counter_label = 1 - error_label;
  for (std::size_t i = 0; i < y01.size(); ++i) {
    if (y01[i] == counter_label) counter_pool.push_back(i);
  }
  Rng rng(mix_seed(cfg.seed, stream));
  std::vector<std::size_t> counter_rows;
  if (counter_pool.size() >= error_rows.size()) {
    const std::vector<std::size_t> pick =
        rng.sample_without_replacement(counter_pool.size(), error_rows.size());
    for (std::size_t p : pick) counter_rows.push_back(counter_pool[p]);
  } else {
    if (warnings != nullptr) {
      warnings->push_back("corrector counter-example pool smaller than error count; "
                          "sampling with replacement");
    }
    for (std::size_t i = 0; i < error_rows.size(); ++i) {
      counter_rows.push_back(counter_pool[rng.below(counter_pool.size())]);
    }
  }
  const std::size_t n = error_rows.size() + counter_rows.size();
  Matrix xt(static_cast<Eigen::Index>(n), x.cols());
  std::vector<int> yt(n);
  for (std::size_t i = 0; i < error_rows.size(); ++i) {
    xt.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(error_rows[i]));
    yt[i] = error_label;
  }
  for (std::size_t i = 0; i < counter_rows.size(); ++i) {
    const std::size_t at = error_rows.size() + i;
    xt.row(static_cast<Eigen::Index>(at)) = x.row(static_cast<Eigen::Index>(counter_rows[i]));
    yt[at] = counter_label;
  }
  TreeHyperparams hp = cfg.corrector_hp;
  hp.seed = mix_seed(cfg.seed, stream + 1);
  return train_learner(xt, yt, 2, hp, cfg.corrector_kind);
}

double routed_accuracy(const ClusterLabelModel& clm, const AnomalyModel& model, const Matrix& x,
                       const std::vector<int>& y01, double p_star) {
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Vector row = x.row(i).transpose();
    const ClusterVerdict v = cluster_assign(clm, row);
    int decided = v.label;
    if (v.p < p_star) {
      const std::optional<EnsembleModel>& guard =
          (v.label == 0) ? model.fn_corrector : model.fp_corrector;
      if (guard.has_value()) {
        decided = corrector_attack_probability(*guard, row) >= 0.5 ? 1 : 0;
      }
    }
    if (decided == y01[static_cast<std::size_t>(i)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(x.rows());
}

}  // namespace

ClusterVerdict cluster_assign(const ClusterLabelModel& clm, const Vector& row) {
  ClusterVerdict v;
  v.cluster = nearest_centroid(clm.km, row);
  v.label = clm.labels[static_cast<std::size_t>(v.cluster)];
  v.p = clm.purity[static_cast<std::size_t>(v.cluster)];
  return v;
}

ClusterLabelModel cl_kmeans_fit(const Matrix& x, const std::vector<int>& y01, int k,
                                Distance distance, const KMeansOptions& opts, double p_star) {
  if (x.rows() != static_cast<Eigen::Index>(y01.size())) {
    throw DataError("cluster labeling needs one label per row");
  }
  if (!(p_star > 0.5 && p_star < 1.0)) {
    throw ConfigError("routing threshold must lie in (0.5, 1)");
  }
  ClusterLabelModel clm;
  clm.km = kmeans_fit(x, k, distance, opts);
  clm.p_star = p_star;
  const std::vector<int> assign = kmeans_assign(clm.km, x);
  const std::size_t clusters = static_cast<std::size_t>(clm.km.centroids.rows());
  std::vector<std::array<std::size_t, 2>> counts(clusters, {0, 0});
  for (std::size_t i = 0; i < assign.size(); ++i) {
    counts[static_cast<std::size_t>(assign[i])][static_cast<std::size_t>(y01[i])]++;
  }
  clm.labels.resize(clusters);
  clm.purity.resize(clusters);
  for (std::size_t c = 0; c < clusters; ++c) {
    const std::size_t normal = counts[c][0];
    const std::size_t attack = counts[c][1];
    const std::size_t total = normal + attack;
    if (total == 0) {  // should not happen: the fitter repairs empty clusters
      clm.labels[c] = 0;
      clm.purity[c] = 0.5;
      continue;
    }
    clm.labels[c] = attack >= normal ? 1 : 0;  // tie goes to the cautious side
    clm.purity[c] =
        static_cast<double>(std::max(normal, attack)) / static_cast<double>(total);
  }
  return clm;
}

AnomalyModel train_anomaly_tier(const Matrix& x, const std::vector<int>& y01,
                                const AnomalyConfig& cfg, AnomalyDiagnostics* diag) {
  if (x.rows() < 2) throw DataError("anomaly tier needs at least two rows");
  if (x.rows() != static_cast<Eigen::Index>(y01.size())) {
    throw DataError("anomaly tier needs one label per row");
  }
  std::size_t attack_rows = 0;
  for (int v : y01) {
    if (v != 0 && v != 1) throw DataError("anomaly tier labels must be 0 or 1");
    attack_rows += static_cast<std::size_t>(v);
  }
  if (attack_rows == 0 || attack_rows == y01.size()) {
    throw DataError("anomaly tier needs both normal and attack rows");
  }

  SplitSpec split_spec;
  split_spec.train_fraction = 1.0 - cfg.holdout_fraction;
  split_spec.seed = mix_seed(cfg.seed, 0xa512);
  split_spec.stratified = true;
  const auto [fit_part, val_part] = split_holdout(as_binary_dataset(x, y01), split_spec);

  const int max_k = static_cast<int>(fit_part.rows());
  const int k_lo = std::min(std::max(2, cfg.k_lo), max_k);
  const int k_hi = std::min(std::max(cfg.k_hi, k_lo), max_k);
  KMeansOptions km_opts;
  km_opts.max_iter = cfg.max_iter;
  km_opts.minibatch = static_cast<std::size_t>(std::max(cfg.minibatch, 0));

  SearchSpace space;
  space.add_int("k", k_lo, k_hi, true)
      .add_categorical("distance", {"euclidean", "manhattan"});
  Objective objective = [&](const Assignment& a) {
    const int k = static_cast<int>(a.get_int("k"));
    const Distance dist = distance_from_name(a.get_string("distance"));
    KMeansOptions opts = km_opts;
    opts.seed = mix_seed(mix_seed(cfg.seed, static_cast<std::uint64_t>(k)),
                         dist == Distance::Manhattan ? 2 : 1);
    const ClusterLabelModel clm =
        cl_kmeans_fit(fit_part.features, fit_part.labels, k, dist, opts, cfg.p_star);
    return -labeling_accuracy(clm, val_part.features, val_part.labels);
  };
  const OptResult result =
      bo_gp_optimize(objective, space, cfg.gp_budget, mix_seed(cfg.seed, 0xa0a1));

  const int best_k = static_cast<int>(result.best.assignment.get_int("k"));
  const Distance best_dist = distance_from_name(result.best.assignment.get_string("distance"));
  if (diag != nullptr) {
    diag->tuning_trials = result.trials;
    diag->validation_accuracy = -result.best.objective;
    diag->chosen_k = best_k;
    diag->chosen_distance = best_dist;
  }

  AnomalyModel model;
  KMeansOptions final_opts = km_opts;
  final_opts.seed = mix_seed(mix_seed(cfg.seed, static_cast<std::uint64_t>(best_k)),
                             best_dist == Distance::Manhattan ? 2 : 1);
  model.clm = cl_kmeans_fit(x, y01, std::min(best_k, static_cast<int>(x.rows())), best_dist,
                            final_opts, cfg.p_star);

  std::vector<std::size_t> fn_rows;
  std::vector<std::size_t> fp_rows;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const ClusterVerdict v = cluster_assign(model.clm, x.row(i).transpose());
    const int truth = y01[static_cast<std::size_t>(i)];
    if (truth == 1 && v.label == 0) fn_rows.push_back(static_cast<std::size_t>(i));
    if (truth == 0 && v.label == 1) fp_rows.push_back(static_cast<std::size_t>(i));
  }
  if (diag != nullptr) {
    diag->fn_count = fn_rows.size();
    diag->fp_count = fp_rows.size();
  }
  std::vector<std::string>* warnings = diag != nullptr ? &diag->warnings : nullptr;
  if (cfg.enable_correctors && !fn_rows.empty()) {
    model.fn_corrector = train_corrector(x, y01, fn_rows, 1, cfg, 0xb100, warnings);
  } else if (cfg.enable_correctors && warnings != nullptr) {
    warnings->push_back("no clustering misses in training; miss corrector omitted");
  }
  if (cfg.enable_correctors && !fp_rows.empty()) {
    model.fp_corrector = train_corrector(x, y01, fp_rows, 0, cfg, 0xb200, warnings);
  } else if (cfg.enable_correctors && warnings != nullptr) {
    warnings->push_back("no clustering false alarms in training; alarm corrector omitted");
  }

  if (cfg.tune_p_star) {
    SearchSpace ps_space;
    ps_space.add_real("p_star", 0.5 + 1e-6, 0.999);
    Objective ps_objective = [&](const Assignment& a) {
      return -routed_accuracy(model.clm, model, val_part.features, val_part.labels,
                              a.get_real("p_star"));
    };
    const OptResult ps_result =
        bo_gp_optimize(ps_objective, ps_space, cfg.p_star_budget, mix_seed(cfg.seed, 0xa0a2));
    model.clm.p_star = ps_result.best.assignment.get_real("p_star");
  }
  return model;
}

double corrector_attack_probability(const EnsembleModel& m, const Vector& row,
                                    std::size_t* node_visits) {
  return m.predict_proba(row, node_visits)[1];
}

}  // namespace tids
