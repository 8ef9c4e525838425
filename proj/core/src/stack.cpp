#include "tids/stack.hpp"

#include <algorithm>
#include <cmath>

#include "tids/dataset.hpp"
#include "tids/errors.hpp"
#include "tids/metrics.hpp"
#include "tids/parallel.hpp"
#include "tids/rng.hpp"
#include "tids/tpe.hpp"

namespace tids {

namespace {

Matrix take_matrix(const Matrix& x, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

std::vector<int> take_labels(const std::vector<int>& y, const std::vector<std::size_t>& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(y[r]);
  return out;
}

constexpr std::array<LearnerKind, 4> kBaseKinds = {LearnerKind::SingleTree, LearnerKind::Bagging,
                                                   LearnerKind::ExtraTrees, LearnerKind::Boosted};

}  // namespace

SearchSpace learner_search_space(LearnerKind kind, const StackConfig& cfg) {
  SearchSpace space;
  switch (kind) {
    case LearnerKind::SingleTree:
      space.add_int("max_depth", 4, cfg.max_depth_cap)
          .add_int("min_samples_split", 2, 20)
          .add_int("min_samples_leaf", 1, 10);
      break;
    case LearnerKind::Bagging:
    case LearnerKind::ExtraTrees:
      space.add_int("max_depth", 4, cfg.max_depth_cap)
          .add_int("min_samples_split", 2, 20)
          .add_int("min_samples_leaf", 1, 10)
          .add_int("n_estimators", 20, std::max(21, cfg.estimators_cap), true)
          .add_categorical("max_features", {"sqrt", "half", "all"});
      break;
    case LearnerKind::Boosted:
      space.add_int("max_depth", 3, 10)
          .add_int("n_estimators", 20, std::max(21, cfg.estimators_cap), true)
          .add_real("learning_rate", 0.05, 0.5, true);
      break;
  }
  return space;
}

TreeHyperparams hyperparams_from_assignment(LearnerKind kind, const Assignment& a,
                                            std::uint64_t seed) {
  TreeHyperparams hp = default_hyperparams(kind);
  if (a.has("max_depth")) hp.max_depth = static_cast<int>(a.get_int("max_depth"));
  if (a.has("min_samples_split"))
    hp.min_samples_split = static_cast<int>(a.get_int("min_samples_split"));
  if (a.has("min_samples_leaf"))
    hp.min_samples_leaf = static_cast<int>(a.get_int("min_samples_leaf"));
  if (a.has("n_estimators")) hp.n_estimators = static_cast<int>(a.get_int("n_estimators"));
  if (a.has("learning_rate")) hp.learning_rate = a.get_real("learning_rate");
  if (a.has("max_features")) {
    const std::string mf = a.get_string("max_features");
    if (mf == "sqrt") {
      hp.max_features = MaxFeatures::sqrt();
    } else if (mf == "half") {
      hp.max_features = MaxFeatures::fraction(0.5);
    } else if (mf == "all") {
      hp.max_features = MaxFeatures::all();
    } else {
      throw ConfigError("unknown max_features choice: " + mf);
    }
  }
  hp.seed = seed;
  return hp;
}

double cv_macro_f1(const Matrix& x, const std::vector<int>& y, int n_classes,
                   const TreeHyperparams& hp, LearnerKind kind, int folds, std::uint64_t seed) {
  std::vector<std::string> warnings;
  int folds_used = 0;
  const std::vector<int> fold_of =
      stratified_fold_ids(y, n_classes, folds, mix_seed(seed, 0xcf1d), &warnings, &folds_used);
  double total = 0.0;
  for (int f = 0; f < folds_used; ++f) {
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> eval_rows;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
      (fold_of[i] == f ? eval_rows : train_rows).push_back(i);
    }
    TreeHyperparams fold_hp = hp;
    fold_hp.seed = mix_seed(hp.seed, 0xcf00u + static_cast<std::uint64_t>(f));
    const EnsembleModel model = train_learner(take_matrix(x, train_rows),
                                              take_labels(y, train_rows), n_classes, fold_hp, kind);
    std::vector<int> preds(eval_rows.size());
    for (std::size_t i = 0; i < eval_rows.size(); ++i) {
      preds[i] = model.predict(x.row(static_cast<Eigen::Index>(eval_rows[i])).transpose());
    }
    total += macro_f1_score(preds, take_labels(y, eval_rows), n_classes);
  }
  return total / static_cast<double>(folds_used);
}

Matrix oof_predictions(const Matrix& x, const std::vector<int>& y, int n_classes, int folds,
                       std::uint64_t seed, const std::vector<FoldPredictFn>& bases,
                       std::vector<int>* fold_of) {
  require(!bases.empty(), "oof_predictions needs at least one base");
  std::vector<std::string> warnings;
  int folds_used = 0;
  const std::vector<int> ids =
      stratified_fold_ids(y, n_classes, folds, mix_seed(seed, 0x00f0), &warnings, &folds_used);
  Matrix out;
  std::vector<Eigen::Index> col_offset(bases.size(), 0);
  for (int f = 0; f < folds_used; ++f) {
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> eval_rows;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      (ids[i] == f ? eval_rows : train_rows).push_back(i);
    }
    const Matrix x_train = take_matrix(x, train_rows);
    const std::vector<int> y_train = take_labels(y, train_rows);
    const Matrix x_eval = take_matrix(x, eval_rows);
    for (std::size_t b = 0; b < bases.size(); ++b) {
      const Matrix part = bases[b](x_train, y_train, x_eval);
      require(part.rows() == static_cast<Eigen::Index>(eval_rows.size()),
              "fold prediction row count mismatch");
      if (f == 0) {
        col_offset[b] = out.cols();
        out.conservativeResize(x.rows(), out.cols() + part.cols());
      }
      for (std::size_t i = 0; i < eval_rows.size(); ++i) {
        out.block(static_cast<Eigen::Index>(eval_rows[i]), col_offset[b], 1, part.cols()) =
            part.row(static_cast<Eigen::Index>(i));
      }
    }
  }
  if (fold_of != nullptr) *fold_of = ids;
  return out;
}

Vector StackedModel::meta_row(const Vector& row, std::size_t* node_visits) const {
  const std::size_t width =
      meta_probabilities ? bases.size() * static_cast<std::size_t>(n_classes) : bases.size();
  Vector features(static_cast<Eigen::Index>(width));
  for (std::size_t b = 0; b < bases.size(); ++b) {
    if (meta_probabilities) {
      const Vector proba = bases[b].predict_proba(row, node_visits);
      features.segment(static_cast<Eigen::Index>(b) * n_classes, n_classes) = proba;
    } else {
      features[static_cast<Eigen::Index>(b)] =
          static_cast<double>(bases[b].predict(row, node_visits));
    }
  }
  return features;
}

Vector StackedModel::predict_proba(const Vector& row, std::size_t* node_visits) const {
  return meta.predict_proba(meta_row(row, node_visits), node_visits);
}

int StackedModel::predict(const Vector& row, std::size_t* node_visits) const {
  return meta.predict(meta_row(row, node_visits), node_visits);
}

std::vector<int> StackedModel::predict_batch(const Matrix& x) const {
  std::vector<int> preds(static_cast<std::size_t>(x.rows()));
  parallel_for(preds.size(), [&](std::size_t i) {
    preds[i] = predict(x.row(static_cast<Eigen::Index>(i)).transpose());
  });
  return preds;
}

StackedModel train_signature_tier(const Matrix& x, const std::vector<int>& y, int n_classes,
                                  const StackConfig& cfg, StackDiagnostics* diag) {
  if (n_classes < 2) throw ConfigError("signature tier needs at least two classes");
  if (x.rows() != static_cast<Eigen::Index>(y.size())) {
    throw DataError("feature rows and label count differ");
  }
  StackedModel model;
  model.n_classes = n_classes;
  model.meta_probabilities = cfg.meta_probabilities;
  model.base_cv_macro_f1.assign(kBaseKinds.size(), 0.0);
  std::vector<TreeHyperparams> tuned(kBaseKinds.size());

  for (std::size_t b = 0; b < kBaseKinds.size(); ++b) {
    const LearnerKind kind = kBaseKinds[b];
    const std::uint64_t base_seed = mix_seed(cfg.seed, 0xbb00u + static_cast<std::uint64_t>(b));
    TreeHyperparams hp = default_hyperparams(kind);
    hp.seed = base_seed;
    double score = 0.0;
    bool scored = false;
    if (cfg.hpo_budget > 0) {
      const SearchSpace space = learner_search_space(kind, cfg);
      Objective objective = [&](const Assignment& a) {
        const TreeHyperparams trial_hp = hyperparams_from_assignment(kind, a, base_seed);
        return -cv_macro_f1(x, y, n_classes, trial_hp, kind, cfg.hpo_cv_folds, cfg.seed);
      };
      try {
        const OptResult result =
            bo_tpe_optimize(objective, space, cfg.hpo_budget, mix_seed(cfg.seed, 0x7e0u + b));
        hp = hyperparams_from_assignment(kind, result.best.assignment, base_seed);
        score = -result.best.objective;
        scored = true;
        if (diag != nullptr) {
          diag->tuning_trials.insert(diag->tuning_trials.end(), result.trials.begin(),
                                     result.trials.end());
        }
      } catch (const std::exception& e) {
        hp = default_hyperparams(kind);
        hp.seed = base_seed;
        if (diag != nullptr) {
          diag->warnings.push_back(std::string("tuning failed for ") + learner_name(kind) +
                                   ", using defaults: " + e.what());
        }
      }
    }
    if (!scored) {
      score = cv_macro_f1(x, y, n_classes, hp, kind, cfg.hpo_cv_folds, cfg.seed);
    }
    tuned[b] = hp;
    model.base_cv_macro_f1[b] = score;
  }

  std::size_t best = 0;
  for (std::size_t b = 1; b < kBaseKinds.size(); ++b) {
    if (model.base_cv_macro_f1[b] > model.base_cv_macro_f1[best]) best = b;
  }
  model.best_base = kBaseKinds[best];
  model.best_base_hp = tuned[best];

  std::vector<FoldPredictFn> fold_fns;
  for (std::size_t b = 0; b < kBaseKinds.size(); ++b) {
    const LearnerKind kind = kBaseKinds[b];
    const TreeHyperparams hp = tuned[b];
    const bool probs = cfg.meta_probabilities;
    fold_fns.push_back([kind, hp, n_classes, probs](const Matrix& x_train,
                                                    const std::vector<int>& y_train,
                                                    const Matrix& x_eval) {
      const EnsembleModel m = train_learner(x_train, y_train, n_classes, hp, kind);
      Matrix out(x_eval.rows(), probs ? n_classes : 1);
      for (Eigen::Index i = 0; i < x_eval.rows(); ++i) {
        if (probs) {
          out.row(i) = m.predict_proba(x_eval.row(i).transpose()).transpose();
        } else {
          out(i, 0) = static_cast<double>(m.predict(x_eval.row(i).transpose()));
        }
      }
      return out;
    });
  }
  std::vector<int> fold_of;
  const Matrix meta_features =
      oof_predictions(x, y, n_classes, cfg.oof_folds, cfg.seed, fold_fns, &fold_of);
  if (diag != nullptr) {
    diag->fold_of = fold_of;
    diag->tuned = tuned;
  }

  TreeHyperparams meta_hp = tuned[best];
  meta_hp.max_features = MaxFeatures::all();  // meta matrix is only a few columns wide
  meta_hp.seed = mix_seed(cfg.seed, 0x3e7a);
  model.meta = train_learner(meta_features, y, n_classes, meta_hp, model.best_base);

  model.bases.reserve(kBaseKinds.size());
  for (std::size_t b = 0; b < kBaseKinds.size(); ++b) {
    model.bases.push_back(train_learner(x, y, n_classes, tuned[b], kBaseKinds[b]));
  }
  return model;
}

}  // namespace tids
