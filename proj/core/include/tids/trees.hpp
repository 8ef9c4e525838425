#ifndef TIDS_TREES_HPP
#define TIDS_TREES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tids/dataset.hpp"

namespace tids {

enum class LearnerKind { SingleTree, Bagging, ExtraTrees, Boosted };

const char* learner_name(LearnerKind k);
LearnerKind learner_from_name(const std::string& name);

struct MaxFeatures {
  enum class Mode { All, Sqrt, Fraction, Count };
  Mode mode = Mode::All;
  double value = 0.0;

  static MaxFeatures all() { return {}; }
  static MaxFeatures sqrt() { return {Mode::Sqrt, 0.0}; }
  static MaxFeatures fraction(double f) { return {Mode::Fraction, f}; }
  static MaxFeatures count(int c) { return {Mode::Count, static_cast<double>(c)}; }
  int resolve(int n_features) const;
};

struct TreeHyperparams {
  int max_depth = 12;
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  int max_leaf_nodes = 0;  // 0 = no cap
  MaxFeatures max_features;
  int n_estimators = 60;
  double learning_rate = 0.3;  // boosted
  double lambda_l2 = 1.0;      // boosted leaf shrinkage
  double row_subsample = 1.0;  // extra-trees row subsets
  bool bootstrap = true;       // bagging row resampling
  std::uint64_t seed = 0;
};

TreeHyperparams default_hyperparams(LearnerKind kind);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> dist;  // class distribution, or {value} in boosted trees
};

struct Tree {
  std::vector<TreeNode> nodes;  // root at index 0

  const TreeNode& leaf_for(const Vector& row, std::size_t* visits = nullptr) const;
  std::size_t leaf_count() const;
};

struct EnsembleModel {
  LearnerKind kind = LearnerKind::SingleTree;
  int n_classes = 0;
  int n_features = 0;
  TreeHyperparams hp;
  std::vector<Tree> trees;         // boosted: round-major, n_classes trees per round
  std::vector<double> base_score;  // boosted per-class prior in log space

  // probabilities sum to 1; argmax ties resolve to the lowest class index
  Vector predict_proba(const Vector& row, std::size_t* node_visits = nullptr) const;
  int predict(const Vector& row, std::size_t* node_visits = nullptr) const;
  std::vector<int> predict_batch(const Matrix& x) const;
  Matrix predict_proba_batch(const Matrix& x) const;
};

// exact greedy impurity search over midpoints of sorted distinct values;
// ties prefer the lowest feature index, then the lowest threshold
EnsembleModel tree_train(const Matrix& x, const std::vector<int>& y, int n_classes,
                         const TreeHyperparams& hp);

// kind = Bagging: bootstrap rows and per-split feature subsets;
// kind = ExtraTrees: no bootstrap, random threshold per candidate feature
EnsembleModel forest_train(const Matrix& x, const std::vector<int>& y, int n_classes,
                           const TreeHyperparams& hp, LearnerKind kind);

// additive one-vs-rest log-odds boosting with softmax link and
// second-order leaf weights; train_loss receives the per-round log-loss
EnsembleModel gbdt_train(const Matrix& x, const std::vector<int>& y, int n_classes,
                         const TreeHyperparams& hp, std::vector<double>* train_loss = nullptr);

EnsembleModel train_learner(const Matrix& x, const std::vector<int>& y, int n_classes,
                            const TreeHyperparams& hp, LearnerKind kind);

EnsembleModel train_learner(const LabeledDataset& d, const TreeHyperparams& hp, LearnerKind kind);

}  // namespace tids

#endif
