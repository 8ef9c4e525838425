#include "tids/trees.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tids/errors.hpp"
#include "tids/parallel.hpp"
#include "tids/rng.hpp"

namespace tids {

const char* learner_name(LearnerKind k) {
  switch (k) {
    case LearnerKind::SingleTree: return "tree";
    case LearnerKind::Bagging: return "bagging";
    case LearnerKind::ExtraTrees: return "extra";
    default: return "boosted";
  }
}

LearnerKind learner_from_name(const std::string& name) {
  if (name == "tree") return LearnerKind::SingleTree;
  if (name == "bagging") return LearnerKind::Bagging;
  if (name == "extra") return LearnerKind::ExtraTrees;
  if (name == "boosted") return LearnerKind::Boosted;
  throw ConfigError("unknown learner: " + name);
}

int MaxFeatures::resolve(int n_features) const {
  int m = n_features;
  switch (mode) {
    case Mode::All:
      m = n_features;
      break;
    case Mode::Sqrt:
      m = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_features))));
      break;
    case Mode::Fraction:
      m = static_cast<int>(std::ceil(value * n_features - 1e-12));
      break;
    case Mode::Count:
      m = static_cast<int>(value);
      break;
  }
  if (m < 1) m = 1;
  if (m > n_features) m = n_features;
  return m;
}

TreeHyperparams default_hyperparams(LearnerKind kind) {
  TreeHyperparams hp;
  switch (kind) {
    case LearnerKind::SingleTree:
      hp.max_depth = 16;
      hp.n_estimators = 1;
      hp.max_features = MaxFeatures::all();
      break;
    case LearnerKind::Bagging:
    case LearnerKind::ExtraTrees:
      hp.max_depth = 14;
      hp.min_samples_leaf = 2;
      hp.n_estimators = 60;
      hp.max_features = MaxFeatures::sqrt();
      break;
    case LearnerKind::Boosted:
      hp.max_depth = 6;
      hp.n_estimators = 60;
      hp.learning_rate = 0.3;
      hp.max_features = MaxFeatures::all();
      break;
  }
  return hp;
}

const TreeNode& Tree::leaf_for(const Vector& row, std::size_t* visits) const {
  const TreeNode* node = &nodes[0];
  std::size_t count = 1;
  while (node->feature >= 0) {
    node = row(node->feature) <= node->threshold ? &nodes[static_cast<std::size_t>(node->left)]
                                                 : &nodes[static_cast<std::size_t>(node->right)];
    ++count;
  }
  if (visits) *visits += count;
  return *node;
}

std::size_t Tree::leaf_count() const {
  std::size_t c = 0;
  for (const auto& n : nodes)
    if (n.feature < 0) ++c;
  return c;
}

namespace {

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double score = std::numeric_limits<double>::infinity();  // lower is better
};

// shared builder state for one classification tree
struct ClassTreeBuilder {
  const Matrix& x;
  const std::vector<int>& y;
  int n_classes;
  const TreeHyperparams& hp;
  int max_feats;
  Rng* rng;  // null = deterministic full feature sweep
  bool random_thresholds;
  Tree out;
  int leaf_budget;  // splits remaining when max_leaf_nodes is set, else -1

  // scratch
  std::vector<std::pair<double, int>> sorted;  // (value, label)

  SplitChoice best_exact_split(const std::vector<std::size_t>& rows,
                               const std::vector<int>& feats) {
    SplitChoice best;
    const double n = static_cast<double>(rows.size());
    std::vector<std::int64_t> total(static_cast<std::size_t>(n_classes), 0);
    for (std::size_t r : rows) ++total[static_cast<std::size_t>(y[r])];
    std::vector<std::int64_t> left(static_cast<std::size_t>(n_classes));
    for (int f : feats) {
      sorted.clear();
      for (std::size_t r : rows) sorted.emplace_back(x(static_cast<Eigen::Index>(r), f), y[r]);
      std::sort(sorted.begin(), sorted.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (sorted.front().first == sorted.back().first) continue;
      std::fill(left.begin(), left.end(), 0);
      std::size_t nl = 0;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        ++left[static_cast<std::size_t>(sorted[i].second)];
        ++nl;
        if (sorted[i].first == sorted[i + 1].first) continue;
        std::size_t nr = sorted.size() - nl;
        if (nl < static_cast<std::size_t>(hp.min_samples_leaf) ||
            nr < static_cast<std::size_t>(hp.min_samples_leaf))
          continue;
        double gl = 0.0, gr = 0.0;
        for (int c = 0; c < n_classes; ++c) {
          double pl = static_cast<double>(left[static_cast<std::size_t>(c)]) /
                      static_cast<double>(nl);
          double pr = static_cast<double>(total[static_cast<std::size_t>(c)] -
                                          left[static_cast<std::size_t>(c)]) /
                      static_cast<double>(nr);
          gl += pl * pl;
          gr += pr * pr;
        }
        double weighted =
            (static_cast<double>(nl) * (1.0 - gl) + static_cast<double>(nr) * (1.0 - gr)) / n;
        if (weighted < best.score) {
          // midpoint of adjacent distinct values; fall back to the left value
          // when rounding would swallow the right one
          double thr = 0.5 * (sorted[i].first + sorted[i + 1].first);
          if (!(thr < sorted[i + 1].first)) thr = sorted[i].first;
          best.found = true;
          best.score = weighted;
          best.feature = f;
          best.threshold = thr;
        }
      }
    }
    return best;
  }

  SplitChoice best_random_split(const std::vector<std::size_t>& rows,
                                const std::vector<int>& feats) {
    SplitChoice best;
    const double n = static_cast<double>(rows.size());
    std::vector<std::int64_t> total(static_cast<std::size_t>(n_classes), 0);
    for (std::size_t r : rows) ++total[static_cast<std::size_t>(y[r])];
    std::vector<std::int64_t> left(static_cast<std::size_t>(n_classes));
    for (int f : feats) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      for (std::size_t r : rows) {
        double v = x(static_cast<Eigen::Index>(r), f);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (!(hi > lo)) continue;
      double thr = rng->uniform(lo, hi);
      if (thr >= hi) thr = std::nextafter(hi, lo);  // keep both sides non-empty candidates
      std::fill(left.begin(), left.end(), 0);
      std::size_t nl = 0;
      for (std::size_t r : rows) {
        if (x(static_cast<Eigen::Index>(r), f) <= thr) {
          ++left[static_cast<std::size_t>(y[r])];
          ++nl;
        }
      }
      std::size_t nr = rows.size() - nl;
      if (nl < static_cast<std::size_t>(hp.min_samples_leaf) ||
          nr < static_cast<std::size_t>(hp.min_samples_leaf) || nl == 0 || nr == 0)
        continue;
      double gl = 0.0, gr = 0.0;
      for (int c = 0; c < n_classes; ++c) {
        double pl = static_cast<double>(left[static_cast<std::size_t>(c)]) / static_cast<double>(nl);
        double pr = static_cast<double>(total[static_cast<std::size_t>(c)] -
                                        left[static_cast<std::size_t>(c)]) /
                    static_cast<double>(nr);
        gl += pl * pl;
        gr += pr * pr;
      }
      double weighted =
          (static_cast<double>(nl) * (1.0 - gl) + static_cast<double>(nr) * (1.0 - gr)) / n;
      if (weighted < best.score) {
        best.found = true;
        best.score = weighted;
        best.feature = f;
        best.threshold = thr;
      }
    }
    return best;
  }

  int make_leaf(const std::vector<std::size_t>& rows) {
    TreeNode node;
    node.dist.assign(static_cast<std::size_t>(n_classes), 0.0);
    for (std::size_t r : rows) node.dist[static_cast<std::size_t>(y[r])] += 1.0;
    for (auto& v : node.dist) v /= static_cast<double>(rows.size());
    out.nodes.push_back(std::move(node));
    return static_cast<int>(out.nodes.size() - 1);
  }

  bool pure(const std::vector<std::size_t>& rows) const {
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (y[rows[i]] != y[rows[0]]) return false;
    return true;
  }

  int build(std::vector<std::size_t>& rows, int depth) {
    if (depth >= hp.max_depth || rows.size() < static_cast<std::size_t>(hp.min_samples_split) ||
        pure(rows) || leaf_budget == 0)
      return make_leaf(rows);

    std::vector<int> feats;
    int f_all = static_cast<int>(x.cols());
    if (max_feats >= f_all || rng == nullptr) {
      feats.resize(static_cast<std::size_t>(f_all));
      std::iota(feats.begin(), feats.end(), 0);
    } else {
      auto picked = rng->sample_without_replacement(static_cast<std::size_t>(f_all),
                                                    static_cast<std::size_t>(max_feats));
      std::sort(picked.begin(), picked.end());
      for (std::size_t p : picked) feats.push_back(static_cast<int>(p));
    }

    SplitChoice split = random_thresholds ? best_random_split(rows, feats)
                                          : best_exact_split(rows, feats);
    if (!split.found) return make_leaf(rows);
    if (leaf_budget > 0) --leaf_budget;

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
      if (x(static_cast<Eigen::Index>(r), split.feature) <= split.threshold)
        left_rows.push_back(r);
      else
        right_rows.push_back(r);
    }
    require(!left_rows.empty() && !right_rows.empty(), "split produced an empty child");
    rows.clear();
    rows.shrink_to_fit();

    TreeNode node;
    node.feature = split.feature;
    node.threshold = split.threshold;
    out.nodes.push_back(node);
    auto self = static_cast<int>(out.nodes.size() - 1);
    int l = build(left_rows, depth + 1);
    int r = build(right_rows, depth + 1);
    out.nodes[static_cast<std::size_t>(self)].left = l;
    out.nodes[static_cast<std::size_t>(self)].right = r;
    return self;
  }
};

Tree build_class_tree(const Matrix& x, const std::vector<int>& y, int n_classes,
                      const TreeHyperparams& hp, const std::vector<std::size_t>& rows,
                      Rng* rng, bool random_thresholds) {
  ClassTreeBuilder b{x,
                     y,
                     n_classes,
                     hp,
                     hp.max_features.resolve(static_cast<int>(x.cols())),
                     rng,
                     random_thresholds,
                     {},
                     hp.max_leaf_nodes > 0 ? hp.max_leaf_nodes - 1 : -1,
                     {}};
  std::vector<std::size_t> work = rows;
  b.build(work, 0);
  return std::move(b.out);
}

// regression tree on gradient/hessian pairs with second-order gain
struct GradTreeBuilder {
  const Matrix& x;
  const std::vector<double>& g;
  const std::vector<double>& h;
  const TreeHyperparams& hp;
  Tree out;

  std::vector<std::pair<double, std::size_t>> sorted;  // (value, row)

  int make_leaf(const std::vector<std::size_t>& rows) {
    double gs = 0.0, hs = 0.0;
    for (std::size_t r : rows) {
      gs += g[r];
      hs += h[r];
    }
    TreeNode node;
    node.dist = {-gs / (hs + hp.lambda_l2)};
    out.nodes.push_back(std::move(node));
    return static_cast<int>(out.nodes.size() - 1);
  }

  int build(std::vector<std::size_t>& rows, int depth) {
    if (depth >= hp.max_depth || rows.size() < static_cast<std::size_t>(hp.min_samples_split))
      return make_leaf(rows);
    double g_total = 0.0, h_total = 0.0;
    for (std::size_t r : rows) {
      g_total += g[r];
      h_total += h[r];
    }
    const double lambda = hp.lambda_l2;
    double base = g_total * g_total / (h_total + lambda);
    double best_gain = 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;
    for (int f = 0; f < static_cast<int>(x.cols()); ++f) {
      sorted.clear();
      for (std::size_t r : rows) sorted.emplace_back(x(static_cast<Eigen::Index>(r), f), r);
      std::sort(sorted.begin(), sorted.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (sorted.front().first == sorted.back().first) continue;
      double gl = 0.0, hl = 0.0;
      std::size_t nl = 0;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        gl += g[sorted[i].second];
        hl += h[sorted[i].second];
        ++nl;
        if (sorted[i].first == sorted[i + 1].first) continue;
        std::size_t nr = sorted.size() - nl;
        if (nl < static_cast<std::size_t>(hp.min_samples_leaf) ||
            nr < static_cast<std::size_t>(hp.min_samples_leaf))
          continue;
        double gr = g_total - gl;
        double hr = h_total - hl;
        double gain = gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - base;
        if (gain > best_gain) {
          double thr = 0.5 * (sorted[i].first + sorted[i + 1].first);
          if (!(thr < sorted[i + 1].first)) thr = sorted[i].first;
          best_gain = gain;
          best_feature = f;
          best_threshold = thr;
        }
      }
    }
    if (best_feature < 0) return make_leaf(rows);

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
      if (x(static_cast<Eigen::Index>(r), best_feature) <= best_threshold)
        left_rows.push_back(r);
      else
        right_rows.push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    TreeNode node;
    node.feature = best_feature;
    node.threshold = best_threshold;
    out.nodes.push_back(node);
    auto self = static_cast<int>(out.nodes.size() - 1);
    int l = build(left_rows, depth + 1);
    int r = build(right_rows, depth + 1);
    out.nodes[static_cast<std::size_t>(self)].left = l;
    out.nodes[static_cast<std::size_t>(self)].right = r;
    return self;
  }
};

void check_train_inputs(const Matrix& x, const std::vector<int>& y, int n_classes) {
  if (x.rows() == 0) throw DataError("cannot train on an empty dataset");
  if (static_cast<std::size_t>(x.rows()) != y.size())
    throw DataError("feature rows and label count differ");
  if (n_classes < 1) throw DataError("class count must be positive");
  for (int label : y)
    if (label < 0 || label >= n_classes) throw DataError("label outside class range");
}

std::vector<std::size_t> all_rows(const Matrix& x) {
  std::vector<std::size_t> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

}  // namespace

EnsembleModel tree_train(const Matrix& x, const std::vector<int>& y, int n_classes,
                         const TreeHyperparams& hp) {
  check_train_inputs(x, y, n_classes);
  EnsembleModel m;
  m.kind = LearnerKind::SingleTree;
  m.n_classes = n_classes;
  m.n_features = static_cast<int>(x.cols());
  m.hp = hp;
  m.trees.push_back(build_class_tree(x, y, n_classes, hp, all_rows(x), nullptr, false));
  return m;
}

EnsembleModel forest_train(const Matrix& x, const std::vector<int>& y, int n_classes,
                           const TreeHyperparams& hp, LearnerKind kind) {
  check_train_inputs(x, y, n_classes);
  if (kind != LearnerKind::Bagging && kind != LearnerKind::ExtraTrees)
    throw ConfigError("forest_train expects a bagging or extra-trees kind");
  if (hp.n_estimators < 1) throw ConfigError("n_estimators must be positive");
  EnsembleModel m;
  m.kind = kind;
  m.n_classes = n_classes;
  m.n_features = static_cast<int>(x.cols());
  m.hp = hp;
  m.trees.resize(static_cast<std::size_t>(hp.n_estimators));
  const auto n = static_cast<std::size_t>(x.rows());
  parallel_for(static_cast<std::size_t>(hp.n_estimators), [&](std::size_t t) {
    Rng rng(mix_seed(hp.seed, 0x7000 + t));
    std::vector<std::size_t> rows;
    if (kind == LearnerKind::Bagging && hp.bootstrap) {
      rows.resize(n);
      for (std::size_t i = 0; i < n; ++i)
        rows[i] = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n)));
      std::sort(rows.begin(), rows.end());
    } else if (kind != LearnerKind::Bagging && hp.row_subsample < 1.0) {
      auto want = static_cast<std::size_t>(
          std::max(1.0, std::floor(hp.row_subsample * static_cast<double>(n))));
      rows = rng.sample_without_replacement(n, want);
      std::sort(rows.begin(), rows.end());
    } else {
      rows = all_rows(x);
    }
    m.trees[t] = build_class_tree(x, y, n_classes, hp, rows, &rng,
                                  kind == LearnerKind::ExtraTrees);
  });
  return m;
}

EnsembleModel gbdt_train(const Matrix& x, const std::vector<int>& y, int n_classes,
                         const TreeHyperparams& hp, std::vector<double>* train_loss) {
  check_train_inputs(x, y, n_classes);
  if (hp.n_estimators < 1) throw ConfigError("n_estimators must be positive");
  EnsembleModel m;
  m.kind = LearnerKind::Boosted;
  m.n_classes = n_classes;
  m.n_features = static_cast<int>(x.cols());
  m.hp = hp;

  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<double> prior(static_cast<std::size_t>(n_classes), 0.0);
  for (int label : y) prior[static_cast<std::size_t>(label)] += 1.0;
  m.base_score.resize(static_cast<std::size_t>(n_classes));
  for (int c = 0; c < n_classes; ++c) {
    double p = std::max(prior[static_cast<std::size_t>(c)] / static_cast<double>(n), 1e-12);
    m.base_score[static_cast<std::size_t>(c)] = std::log(p);
  }
  if (n_classes == 1) return m;  // constant prior, no trees needed

  Matrix scores(static_cast<Eigen::Index>(n), n_classes);
  for (int c = 0; c < n_classes; ++c)
    scores.col(c).setConstant(m.base_score[static_cast<std::size_t>(c)]);

  Matrix probs(static_cast<Eigen::Index>(n), n_classes);
  auto refresh_probs = [&]() {
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
      double mx = scores.row(i).maxCoeff();
      double denom = 0.0;
      for (int c = 0; c < n_classes; ++c) {
        probs(i, c) = std::exp(scores(i, c) - mx);
        denom += probs(i, c);
      }
      probs.row(i) /= denom;
    }
  };

  std::vector<double> g(n), h(n);
  auto rows = all_rows(x);
  for (int round = 0; round < hp.n_estimators; ++round) {
    refresh_probs();
    for (int c = 0; c < n_classes; ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        double p = probs(static_cast<Eigen::Index>(i), c);
        g[i] = p - (y[i] == c ? 1.0 : 0.0);
        h[i] = std::max(p * (1.0 - p), 1e-16);
      }
      GradTreeBuilder b{x, g, h, hp, {}, {}};
      std::vector<std::size_t> work = rows;
      b.build(work, 0);
      Tree tree = std::move(b.out);
      for (std::size_t i = 0; i < n; ++i) {
        Vector row = x.row(static_cast<Eigen::Index>(i)).transpose();
        scores(static_cast<Eigen::Index>(i), c) +=
            hp.learning_rate * tree.leaf_for(row).dist[0];
      }
      m.trees.push_back(std::move(tree));
    }
    if (train_loss) {
      refresh_probs();
      double loss = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        loss -= std::log(std::max(probs(static_cast<Eigen::Index>(i), y[i]), 1e-300));
      train_loss->push_back(loss / static_cast<double>(n));
    }
  }
  return m;
}

EnsembleModel train_learner(const Matrix& x, const std::vector<int>& y, int n_classes,
                            const TreeHyperparams& hp, LearnerKind kind) {
  switch (kind) {
    case LearnerKind::SingleTree: return tree_train(x, y, n_classes, hp);
    case LearnerKind::Bagging:
    case LearnerKind::ExtraTrees: return forest_train(x, y, n_classes, hp, kind);
    default: return gbdt_train(x, y, n_classes, hp);
  }
}

EnsembleModel train_learner(const LabeledDataset& d, const TreeHyperparams& hp, LearnerKind kind) {
  return train_learner(d.features, d.labels, static_cast<int>(d.class_names.size()), hp, kind);
}

Vector EnsembleModel::predict_proba(const Vector& row, std::size_t* node_visits) const {
  if (row.size() != n_features)
    throw DataError("model expects " + std::to_string(n_features) + " features, got " +
                    std::to_string(row.size()));
  Vector out = Vector::Zero(n_classes);
  if (kind == LearnerKind::Boosted) {
    for (int c = 0; c < n_classes; ++c) out(c) = base_score[static_cast<std::size_t>(c)];
    const int rounds = n_classes > 0 ? static_cast<int>(trees.size()) / n_classes : 0;
    for (int r = 0; r < rounds; ++r)
      for (int c = 0; c < n_classes; ++c)
        out(c) += hp.learning_rate *
                  trees[static_cast<std::size_t>(r * n_classes + c)].leaf_for(row, node_visits)
                      .dist[0];
    double mx = out.maxCoeff();
    double denom = 0.0;
    for (int c = 0; c < n_classes; ++c) {
      out(c) = std::exp(out(c) - mx);
      denom += out(c);
    }
    out /= denom;
    return out;
  }
  for (const Tree& t : trees) {
    const TreeNode& leaf = t.leaf_for(row, node_visits);
    for (int c = 0; c < n_classes; ++c) out(c) += leaf.dist[static_cast<std::size_t>(c)];
  }
  out /= static_cast<double>(trees.size());
  return out;
}

int EnsembleModel::predict(const Vector& row, std::size_t* node_visits) const {
  Vector p = predict_proba(row, node_visits);
  int best = 0;
  for (int c = 1; c < n_classes; ++c)
    if (p(c) > p(best)) best = c;
  return best;
}

std::vector<int> EnsembleModel::predict_batch(const Matrix& x) const {
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  parallel_for(out.size(), [&](std::size_t i) {
    out[i] = predict(x.row(static_cast<Eigen::Index>(i)).transpose());
  });
  return out;
}

Matrix EnsembleModel::predict_proba_batch(const Matrix& x) const {
  Matrix out(x.rows(), n_classes);
  parallel_for(static_cast<std::size_t>(x.rows()), [&](std::size_t i) {
    out.row(static_cast<Eigen::Index>(i)) =
        predict_proba(x.row(static_cast<Eigen::Index>(i)).transpose()).transpose();
  });
  return out;
}

}  // namespace tids
