#ifndef TIDS_STACK_HPP
#define TIDS_STACK_HPP

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "tids/search_space.hpp"
#include "tids/trees.hpp"

namespace tids {

struct StackConfig {
  int hpo_budget = 50;    // density-ratio optimizer trials per base, 0 = defaults only
  int hpo_cv_folds = 10;  // folds behind each tuning objective
  int oof_folds = 5;      // folds for the out-of-fold meta features
  bool meta_probabilities = false;  // meta features as probabilities instead of labels
  std::uint64_t seed = 0;
  // search space ceilings, useful to bound model size
  int max_depth_cap = 24;
  int estimators_cap = 150;
};

// four heterogeneous tree ensembles blended by a meta learner that reads
// their out-of-fold predictions
struct StackedModel {
  std::vector<EnsembleModel> bases;  // tree, bagging, extra, boosted
  EnsembleModel meta;
  LearnerKind best_base = LearnerKind::Bagging;
  TreeHyperparams best_base_hp;
  bool meta_probabilities = false;
  int n_classes = 0;
  std::vector<double> base_cv_macro_f1;  // tuning score per base

  Vector meta_row(const Vector& row, std::size_t* node_visits = nullptr) const;
  Vector predict_proba(const Vector& row, std::size_t* node_visits = nullptr) const;
  int predict(const Vector& row, std::size_t* node_visits = nullptr) const;
  std::vector<int> predict_batch(const Matrix& x) const;
};

SearchSpace learner_search_space(LearnerKind kind, const StackConfig& cfg);
TreeHyperparams hyperparams_from_assignment(LearnerKind kind, const Assignment& a,
                                            std::uint64_t seed);

// mean k-fold macro-F1 of one learner, the tuning objective
double cv_macro_f1(const Matrix& x, const std::vector<int>& y, int n_classes,
                   const TreeHyperparams& hp, LearnerKind kind, int folds, std::uint64_t seed);

// trains on the complement of each fold and predicts the fold itself;
// prediction column layout is one column per entry of fold_models
using FoldPredictFn = std::function<Matrix(const Matrix& x_train, const std::vector<int>& y_train,
                                           const Matrix& x_eval)>;
Matrix oof_predictions(const Matrix& x, const std::vector<int>& y, int n_classes, int folds,
                       std::uint64_t seed, const std::vector<FoldPredictFn>& bases,
                       std::vector<int>* fold_of = nullptr);

struct StackDiagnostics {
  std::vector<int> fold_of;                     // meta-feature fold per row
  std::vector<Trial> tuning_trials;             // concatenated, all bases
  std::vector<std::string> warnings;
  std::vector<TreeHyperparams> tuned;           // per base kind
};

StackedModel train_signature_tier(const Matrix& x, const std::vector<int>& y, int n_classes,
                                  const StackConfig& cfg, StackDiagnostics* diag = nullptr);

}  // namespace tids

#endif
