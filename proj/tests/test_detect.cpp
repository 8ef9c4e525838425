#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <vector>

#include "doctest.h"
#include "tids/anomaly.hpp"
#include "tids/config.hpp"
#include "tids/errors.hpp"
#include "tids/metrics.hpp"
#include "tids/pipeline.hpp"
#include "tids/rng.hpp"
#include "tids/serialize.hpp"
#include "tids/stack.hpp"

using namespace tids;

namespace {

Matrix blob_matrix(const std::vector<std::pair<double, double>>& centers, int per_center,
                   double spread, std::uint64_t seed, std::vector<int>* labels) {
  Rng rng(seed);
  Matrix x(static_cast<Eigen::Index>(centers.size()) * per_center, 2);
  Eigen::Index r = 0;
  for (std::size_t c = 0; c < centers.size(); ++c)
    for (int i = 0; i < per_center; ++i, ++r) {
      x(r, 0) = centers[c].first + spread * rng.gaussian();
      x(r, 1) = centers[c].second + spread * rng.gaussian();
      if (labels) labels->push_back(static_cast<int>(c));
    }
  return x;
}

Tree single_leaf(std::vector<double> dist) {
  TreeNode n;
  n.dist = std::move(dist);
  Tree t;
  t.nodes.push_back(n);
  return t;
}

EnsembleModel leaf_model(std::vector<double> dist, int n_features) {
  EnsembleModel m;
  m.kind = LearnerKind::SingleTree;
  m.n_classes = static_cast<int>(dist.size());
  m.n_features = n_features;
  m.trees.push_back(single_leaf(std::move(dist)));
  return m;
}

// detector with an identity front end, a constant-verdict stack and a
// two-cluster labeled k-means, small enough to reason about by hand
PipelineModel toy_pipeline(int stack_class, double purity0, double purity1) {
  PipelineModel p;
  p.class_names = {"normal", "attack"};
  p.attack_class = {0, 1};
  p.normal_class = 0;
  p.feature_names = {"a", "b"};

  p.scaler.mean = Vector::Zero(2);
  p.scaler.stddev = Vector::Ones(2);
  p.selection.kept = {0, 1};
  p.selection.importance = {0.5, 0.5};
  p.selection.kept_names = {"a", "b"};

  Matrix anchors(2, 2);
  anchors << 0, 0, 10, 10;
  KpcaConfig kcfg;
  kcfg.kernel = KernelKind::Linear;
  kcfg.components = 1;
  p.kpca = kpca_fit(anchors, kcfg);

  p.stack.n_classes = 2;
  p.stack.meta_probabilities = false;
  for (int b = 0; b < 4; ++b) p.stack.bases.push_back(leaf_model({0.0, 1.0}, 2));
  p.stack.meta = leaf_model(stack_class == 1 ? std::vector<double>{0.0, 1.0}
                                             : std::vector<double>{1.0, 0.0},
                            4);

  Matrix z = kpca_transform(p.kpca, anchors);
  p.anomaly.clm.km.centroids = z;
  p.anomaly.clm.km.distance = Distance::Euclidean;
  p.anomaly.clm.labels = {0, 1};
  p.anomaly.clm.purity = {purity0, purity1};
  p.anomaly.clm.p_star = 0.933;
  return p;
}

Vector probe(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

LabeledDataset three_class_blobs(int per_class, double spread, std::uint64_t seed) {
  LabeledDataset d;
  d.feature_names = {"x", "y", "w"};
  d.class_names = {"Benign", "Flood", "Probe"};
  d.attack_class = {0, 1, 1};
  Rng rng(seed);
  std::vector<std::pair<double, double>> centers = {{0, 0}, {8, 0}, {0, 8}};
  d.features.resize(3 * per_class, 3);
  Eigen::Index r = 0;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < per_class; ++i, ++r) {
      d.features(r, 0) = centers[static_cast<std::size_t>(c)].first + spread * rng.gaussian();
      d.features(r, 1) = centers[static_cast<std::size_t>(c)].second + spread * rng.gaussian();
      d.features(r, 2) = rng.gaussian();  // pure noise column
      d.labels.push_back(c);
    }
  return d;
}

Config tiny_train_config() {
  return Config::from_string(
      "seed=5\n"
      "stack.budget=0\n"
      "stack.cv_folds=2\n"
      "stack.oof_folds=2\n"
      "features.alpha_ig=0.95\n"
      "kpca.components=2\n"
      "anomaly.k_lo=2\n"
      "anomaly.k_hi=4\n"
      "anomaly.budget=2\n"
      "anomaly.minibatch=0\n");
}

}  // namespace

TEST_CASE("out-of-fold predictions never see their own fold") {
  std::vector<int> y;
  Matrix x = blob_matrix({{0, 0}, {6, 6}}, 20, 0.5, 3, &y);

  // the "model" memorizes its training rows; a 1 leaking out would prove a
  // fold predicted rows it trained on
  FoldPredictFn memorizer = [](const Matrix& x_train, const std::vector<int>&,
                               const Matrix& x_eval) {
    Matrix out = Matrix::Zero(x_eval.rows(), 1);
    for (Eigen::Index i = 0; i < x_eval.rows(); ++i)
      for (Eigen::Index t = 0; t < x_train.rows(); ++t)
        if ((x_eval.row(i) - x_train.row(t)).cwiseAbs().maxCoeff() == 0.0) out(i, 0) = 1.0;
    return out;
  };
  std::vector<int> fold_of;
  Matrix oof = oof_predictions(x, y, 2, 4, 11, {memorizer}, &fold_of);
  CHECK(oof.cwiseAbs().maxCoeff() == 0.0);

  REQUIRE(fold_of.size() == 40);
  std::set<int> folds_seen(fold_of.begin(), fold_of.end());
  CHECK(folds_seen.size() == 4);
  for (int f : fold_of) {
    CHECK(f >= 0);
    CHECK(f < 4);
  }
}

TEST_CASE("out-of-fold columns follow the base order") {
  std::vector<int> y;
  Matrix x = blob_matrix({{0, 0}, {5, 5}}, 10, 0.4, 9, &y);
  FoldPredictFn sevens = [](const Matrix&, const std::vector<int>&, const Matrix& x_eval) {
    return Matrix::Constant(x_eval.rows(), 1, 7.0);
  };
  FoldPredictFn pair_nines = [](const Matrix&, const std::vector<int>&, const Matrix& x_eval) {
    return Matrix::Constant(x_eval.rows(), 2, 9.0);
  };
  Matrix oof = oof_predictions(x, y, 2, 2, 1, {sevens, pair_nines});
  REQUIRE(oof.cols() == 3);
  CHECK(oof.col(0).minCoeff() == 7.0);
  CHECK(oof.col(0).maxCoeff() == 7.0);
  CHECK(oof.col(1).minCoeff() == 9.0);
  CHECK(oof.col(2).maxCoeff() == 9.0);
}

TEST_CASE("separable classes give a perfect stack") {
  std::vector<int> y;
  Matrix x = blob_matrix({{0, 0}, {9, 9}}, 30, 0.4, 21, &y);
  StackConfig cfg;
  cfg.hpo_budget = 0;
  cfg.hpo_cv_folds = 3;
  cfg.oof_folds = 3;
  cfg.seed = 4;
  StackedModel stack = train_signature_tier(x, y, 2, cfg);
  std::vector<int> preds = stack.predict_batch(x);
  CHECK(preds == y);
  REQUIRE(stack.bases.size() == 4);
  REQUIRE(stack.base_cv_macro_f1.size() == 4);
  for (double f1 : stack.base_cv_macro_f1) CHECK(f1 == doctest::Approx(1.0));
}

TEST_CASE("the blend does not fall behind its best base") {
  // one informative column plus noise: all four bases learn the same rule and
  // the meta learner must not lose it
  auto make = [](std::uint64_t seed, Matrix& x, std::vector<int>& y) {
    Rng rng(seed);
    x.resize(150, 3);
    for (int i = 0; i < 150; ++i) {
      int label = static_cast<int>(rng.below(2));
      y.push_back(label);
      x(i, 0) = label * 2.0 + 0.8 * rng.gaussian();
      x(i, 1) = rng.gaussian();
      x(i, 2) = rng.gaussian();
    }
  };
  Matrix x_train, x_test;
  std::vector<int> y_train, y_test;
  make(31, x_train, y_train);
  make(32, x_test, y_test);

  StackConfig cfg;
  cfg.hpo_budget = 0;
  cfg.hpo_cv_folds = 3;
  cfg.oof_folds = 3;
  cfg.seed = 7;
  StackDiagnostics diag;
  StackedModel stack = train_signature_tier(x_train, y_train, 2, cfg, &diag);
  CHECK(diag.fold_of.size() == y_train.size());
  REQUIRE(diag.tuned.size() == 4);

  auto accuracy_of = [&](const std::vector<int>& preds) {
    int hits = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
      if (preds[i] == y_test[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(preds.size());
  };
  double best_base = 0.0;
  for (const EnsembleModel& base : stack.bases)
    best_base = std::max(best_base, accuracy_of(base.predict_batch(x_test)));
  double blended = accuracy_of(stack.predict_batch(x_test));
  CHECK(blended >= best_base - 0.005);
}

TEST_CASE("cluster labels carry the majority and its share") {
  // blob A: 9 attacks and 1 normal; blob B: pure normal
  Matrix x(20, 2);
  std::vector<int> y01;
  Rng rng(13);
  for (int i = 0; i < 10; ++i) {
    x(i, 0) = 0.0 + 0.05 * rng.gaussian();
    x(i, 1) = 0.0 + 0.05 * rng.gaussian();
    y01.push_back(i == 0 ? 0 : 1);
  }
  for (int i = 10; i < 20; ++i) {
    x(i, 0) = 30.0 + 0.05 * rng.gaussian();
    x(i, 1) = 30.0 + 0.05 * rng.gaussian();
    y01.push_back(0);
  }
  KMeansOptions opts;
  opts.seed = 2;
  ClusterLabelModel clm = cl_kmeans_fit(x, y01, 2, Distance::Euclidean, opts);
  ClusterVerdict va = cluster_assign(clm, probe(0, 0));
  CHECK(va.label == 1);
  CHECK(va.p == doctest::Approx(0.9));
  CHECK(va.p < clm.p_star);  // 0.9 sits under the routing threshold
  ClusterVerdict vb = cluster_assign(clm, probe(30, 30));
  CHECK(vb.label == 0);
  CHECK(vb.p == doctest::Approx(1.0));

  CHECK_THROWS_AS(cl_kmeans_fit(x, {0, 1}, 2, Distance::Euclidean, opts), DataError);
  CHECK_THROWS_AS(cl_kmeans_fit(x, y01, 2, Distance::Euclidean, opts, 0.4), ConfigError);
  CHECK_THROWS_AS(cl_kmeans_fit(x, y01, 2, Distance::Euclidean, opts, 1.0), ConfigError);
}

TEST_CASE("an evenly split cluster counts as attack") {
  Matrix x(4, 1);
  x << 0, 0.1, -0.1, 0.05;
  std::vector<int> y01 = {0, 0, 1, 1};
  KMeansOptions opts;
  opts.seed = 1;
  ClusterLabelModel clm = cl_kmeans_fit(x, y01, 1, Distance::Euclidean, opts);
  CHECK(clm.labels[0] == 1);
  CHECK(clm.purity[0] == doctest::Approx(0.5));
}

TEST_CASE("equidistant rows go to the lower cluster index") {
  ClusterLabelModel clm;
  clm.km.centroids.resize(2, 1);
  clm.km.centroids << -1.0, 1.0;
  clm.km.distance = Distance::Euclidean;
  clm.labels = {0, 1};
  clm.purity = {1.0, 1.0};
  Vector mid(1);
  mid << 0.0;
  CHECK(cluster_assign(clm, mid).cluster == 0);
}

TEST_CASE("clean clusters need no correctors") {
  std::vector<int> y01;
  Matrix x = blob_matrix({{0, 0}, {20, 20}}, 40, 0.3, 17, &y01);
  AnomalyConfig cfg;
  cfg.k_lo = 2;
  cfg.k_hi = 2;
  cfg.gp_budget = 2;
  cfg.minibatch = 0;
  cfg.seed = 3;
  AnomalyDiagnostics diag;
  AnomalyModel m = train_anomaly_tier(x, y01, cfg, &diag);
  CHECK(m.clm.km.centroids.rows() == 2);
  for (double p : m.clm.purity) CHECK(p == doctest::Approx(1.0));
  CHECK(!m.fn_corrector.has_value());
  CHECK(!m.fp_corrector.has_value());
  CHECK(diag.fn_count == 0);
  CHECK(diag.fp_count == 0);
  CHECK(diag.validation_accuracy == doctest::Approx(1.0));
  CHECK(diag.chosen_k == 2);
  CHECK(diag.warnings.size() >= 2);  // both omissions are reported
}

TEST_CASE("misses hiding in a normal cluster get a corrector") {
  Rng rng(23);
  Matrix x(64, 2);
  std::vector<int> y01;
  for (int i = 0; i < 30; ++i) {  // normal blob
    x(i, 0) = 0.2 * rng.gaussian();
    x(i, 1) = 0.2 * rng.gaussian();
    y01.push_back(0);
  }
  for (int i = 30; i < 34; ++i) {  // attacks camouflaged inside it
    x(i, 0) = 0.3 + 0.05 * rng.gaussian();
    x(i, 1) = 0.3 + 0.05 * rng.gaussian();
    y01.push_back(1);
  }
  for (int i = 34; i < 64; ++i) {  // obvious attack blob
    x(i, 0) = 15.0 + 0.2 * rng.gaussian();
    x(i, 1) = 15.0 + 0.2 * rng.gaussian();
    y01.push_back(1);
  }
  AnomalyConfig cfg;
  cfg.k_lo = 2;
  cfg.k_hi = 2;
  cfg.gp_budget = 2;
  cfg.minibatch = 0;
  cfg.seed = 9;
  cfg.corrector_hp.n_estimators = 10;
  AnomalyDiagnostics diag;
  AnomalyModel m = train_anomaly_tier(x, y01, cfg, &diag);
  CHECK(diag.fn_count == 4);
  REQUIRE(m.fn_corrector.has_value());
  CHECK(!m.fp_corrector.has_value());
  CHECK(m.fn_corrector->n_classes == 2);
  double p_att = corrector_attack_probability(*m.fn_corrector, probe(0.3, 0.3));
  CHECK(p_att >= 0.0);
  CHECK(p_att <= 1.0);
  CHECK(p_att == m.fn_corrector->predict_proba(probe(0.3, 0.3))[1]);

  CHECK_THROWS_AS(train_anomaly_tier(x, std::vector<int>(64, 1), cfg), DataError);
  CHECK_THROWS_AS(train_anomaly_tier(x, {0, 1}, cfg), DataError);
  std::vector<int> bad = y01;
  bad[0] = 3;
  CHECK_THROWS_AS(train_anomaly_tier(x, bad, cfg), DataError);
}

TEST_CASE("a confident attack verdict never leaves the first tier") {
  PipelineModel p = toy_pipeline(1, 0.95, 0.95);
  DetectStats stats;
  Verdict v = p.detect(probe(0, 0), &stats);
  CHECK(v.kind == VerdictKind::Known);
  CHECK(v.class_index == 1);
  CHECK(v.confidence == doctest::Approx(1.0));
  CHECK(v.tier_trace == std::vector<int>{1});
  CHECK(verdict_is_attack(v));
  CHECK(stats.tiers_fired == 1);
  CHECK(stats.distance_evals == 0);
  CHECK(stats.node_visits > 0);
}

TEST_CASE("trusted clusters decide stack-normal rows") {
  PipelineModel p = toy_pipeline(0, 0.95, 0.95);
  DetectStats stats;
  Verdict normal = p.detect(probe(0, 0), &stats);
  CHECK(normal.kind == VerdictKind::Normal);
  CHECK(normal.class_index == 0);
  CHECK(normal.confidence == doctest::Approx(0.95));
  CHECK(normal.tier_trace == std::vector<int>{1, 3});
  CHECK(!verdict_is_attack(normal));
  CHECK(stats.tiers_fired == 2);
  CHECK(stats.distance_evals == 2);

  Verdict attack = p.detect(probe(10, 10));
  CHECK(attack.kind == VerdictKind::UnknownAttack);
  CHECK(attack.class_index == -1);
  CHECK(attack.confidence == doctest::Approx(0.95));
  CHECK(attack.tier_trace == std::vector<int>{1, 3});
  CHECK(verdict_is_attack(attack));
}

TEST_CASE("a doubtful normal cluster defers to the miss corrector") {
  PipelineModel p = toy_pipeline(0, 0.6, 0.95);
  p.anomaly.fn_corrector = leaf_model({0.0, 1.0}, 1);  // always says attack
  Verdict v = p.detect(probe(0, 0));
  CHECK(v.kind == VerdictKind::UnknownAttack);
  CHECK(v.class_index == -1);
  CHECK(v.confidence == doctest::Approx(1.0));
  CHECK(v.tier_trace == std::vector<int>{1, 3, 4});

  p.anomaly.fn_corrector = leaf_model({1.0, 0.0}, 1);  // always says normal
  Verdict cleared = p.detect(probe(0, 0));
  CHECK(cleared.kind == VerdictKind::Normal);
  CHECK(cleared.class_index == 0);
  CHECK(cleared.confidence == doctest::Approx(1.0));
  CHECK(cleared.tier_trace == std::vector<int>{1, 3, 4});
}

TEST_CASE("a doubtful attack cluster defers to the alarm corrector") {
  PipelineModel p = toy_pipeline(0, 0.95, 0.6);
  p.anomaly.fp_corrector = leaf_model({1.0, 0.0}, 1);  // clears the alarm
  DetectStats stats;
  Verdict v = p.detect(probe(10, 10), &stats);
  CHECK(v.kind == VerdictKind::Normal);
  CHECK(v.class_index == 0);
  CHECK(v.tier_trace == std::vector<int>{1, 3, 4});
  CHECK(stats.tiers_fired == 3);
}

TEST_CASE("without a corrector the cluster label is final") {
  PipelineModel p = toy_pipeline(0, 0.6, 0.95);
  Verdict v = p.detect(probe(0, 0));
  CHECK(v.kind == VerdictKind::Normal);
  CHECK(v.tier_trace == std::vector<int>{1, 3});
  CHECK(v.confidence == doctest::Approx(0.6));
}

TEST_CASE("every verdict lands in one of the three shapes") {
  LabeledDataset d = three_class_blobs(30, 0.8, 41);
  PipelineModel p = train_pipeline(d, tiny_train_config());

  const std::vector<std::vector<int>> shapes = {{1}, {1, 3}, {1, 3, 4}};
  Rng rng(55);
  for (int i = 0; i < 200; ++i) {
    Vector row(3);
    if (i < 90) {
      row = d.features.row(i % d.features.rows()).transpose();
    } else {
      for (int j = 0; j < 3; ++j) row(j) = rng.uniform(-5.0, 15.0);
    }
    DetectStats stats;
    Verdict v = p.detect(row, &stats);
    CHECK(std::find(shapes.begin(), shapes.end(), v.tier_trace) != shapes.end());
    CHECK(stats.tiers_fired == v.tier_trace.size());
    CHECK(v.confidence >= 0.0);
    CHECK(v.confidence <= 1.0);
    switch (v.kind) {
      case VerdictKind::Known:
        CHECK(v.class_index >= 0);
        CHECK(p.attack_class[static_cast<std::size_t>(v.class_index)] != 0);
        break;
      case VerdictKind::Normal:
        CHECK(v.class_index == p.normal_class);
        break;
      case VerdictKind::UnknownAttack:
        CHECK(v.class_index == -1);
        break;
    }
  }

  std::vector<Verdict> batch = p.detect_batch(d.features);
  REQUIRE(batch.size() == d.rows());
  for (std::size_t i = 0; i < 5; ++i) {
    Verdict direct = p.detect(d.features.row(static_cast<Eigen::Index>(i)).transpose());
    CHECK(batch[i].kind == direct.kind);
    CHECK(batch[i].class_index == direct.class_index);
  }
}

TEST_CASE("stripping the correctors falls back to raw cluster labels") {
  LabeledDataset d = three_class_blobs(30, 1.4, 43);
  PipelineModel p = train_pipeline(d, tiny_train_config());
  PipelineModel stripped = p;
  stripped.anomaly.fn_corrector.reset();
  stripped.anomaly.fp_corrector.reset();

  for (Eigen::Index i = 0; i < d.features.rows(); ++i) {
    Vector row = d.features.row(i).transpose();
    Verdict v = stripped.detect(row);
    if (v.tier_trace.size() < 2) continue;  // known-attack rows never reach the clusters
    CHECK(v.tier_trace == std::vector<int>{1, 3});
    Vector sel = stripped.selection.apply_row(zscore_apply_row(stripped.scaler, row));
    ClusterVerdict cv = cluster_assign(stripped.anomaly.clm, kpca_transform_row(stripped.kpca, sel));
    CHECK((v.kind == VerdictKind::UnknownAttack) == (cv.label == 1));
    CHECK(v.confidence == doctest::Approx(cv.p));
  }
}

TEST_CASE("a saved detector answers exactly like the original") {
  LabeledDataset d = three_class_blobs(30, 0.9, 47);
  PipelineModel p = train_pipeline(d, tiny_train_config());

  const std::string path =
      (std::filesystem::temp_directory_path() / "tids_roundtrip_model.bin").string();
  save_pipeline(p, path);
  PipelineModel back = load_pipeline(path);
  CHECK(pipeline_bytes(back) == pipeline_bytes(p));

  Rng rng(77);
  Matrix probes(1000, 3);
  for (Eigen::Index i = 0; i < probes.rows(); ++i)
    for (int j = 0; j < 3; ++j) probes(i, j) = rng.uniform(-6.0, 16.0);
  for (Eigen::Index i = 0; i < probes.rows(); ++i) {
    Verdict a = p.detect(probes.row(i).transpose());
    Verdict b = back.detect(probes.row(i).transpose());
    CHECK(a.kind == b.kind);
    CHECK(a.class_index == b.class_index);
    CHECK(a.confidence == b.confidence);  // bitwise
    CHECK(a.tier_trace == b.tier_trace);
  }
  std::filesystem::remove(path);
}

TEST_CASE("corrupt model files are rejected with a clear error") {
  LabeledDataset d = three_class_blobs(12, 0.5, 3);
  Config cfg = tiny_train_config();
  PipelineModel p = train_pipeline(d, cfg);
  std::string bytes = pipeline_bytes(p);

  auto path_for = [](const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
  };

  std::string versioned = bytes;
  versioned[8] = static_cast<char>(0x7f);  // unsupported format version
  write_file_bytes(path_for("tids_bad_version.bin"), versioned);
  CHECK_THROWS_WITH_AS(load_pipeline(path_for("tids_bad_version.bin")),
                       doctest::Contains("version"), DataError);

  std::string magicless = bytes;
  magicless[0] = 'X';
  write_file_bytes(path_for("tids_bad_magic.bin"), magicless);
  CHECK_THROWS_AS(load_pipeline(path_for("tids_bad_magic.bin")), DataError);

  write_file_bytes(path_for("tids_truncated.bin"), bytes.substr(0, bytes.size() - 9));
  CHECK_THROWS_AS(load_pipeline(path_for("tids_truncated.bin")), DataError);

  write_file_bytes(path_for("tids_trailing.bin"), bytes + "junk");
  CHECK_THROWS_AS(load_pipeline(path_for("tids_trailing.bin")), DataError);

  CHECK_THROWS_AS(load_pipeline(path_for("tids_missing_file.bin")), DataError);

  for (const char* name : {"tids_bad_version.bin", "tids_bad_magic.bin", "tids_truncated.bin",
                           "tids_trailing.bin"})
    std::filesystem::remove(path_for(name));
}

TEST_CASE("binary primitives survive a round trip") {
  BinWriter w;
  w.real(3.141592653589793);
  w.real(-0.0);
  w.integer((std::int64_t{1} << 53) - 1);
  w.integer(-42);
  w.uint64(0xffffffffffffffffULL);
  w.uint64(0);
  w.text("hello `world`\nwith bytes\x01");
  w.text("");
  Vector v(3);
  v << 1.5, -2.5, 1e300;
  w.vec(v);
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  w.mat(m);
  w.section("payload");

  BinReader r(w.buffer());
  CHECK(r.real() == 3.141592653589793);
  CHECK(r.real() == 0.0);
  CHECK(r.integer() == (std::int64_t{1} << 53) - 1);
  CHECK(r.integer() == -42);
  CHECK(r.uint64() == 0xffffffffffffffffULL);
  CHECK(r.uint64() == 0);
  CHECK(r.text() == "hello `world`\nwith bytes\x01");
  CHECK(r.text().empty());
  CHECK(r.vec() == v);
  CHECK(r.mat() == m);
  CHECK(r.section() == "payload");
  CHECK(r.done());
  CHECK_THROWS_AS(r.real(), DataError);

  BinReader short_reader(std::string("ab"));
  CHECK_THROWS_AS(short_reader.real(), DataError);
}
