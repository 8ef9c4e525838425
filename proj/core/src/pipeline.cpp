#include "tids/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "tids/errors.hpp"
#include "tids/parallel.hpp"
#include "tids/rng.hpp"
#include "tids/serialize.hpp"
#include "tids/smote.hpp"

namespace tids {

namespace {

constexpr char kMagic[9] = "TIDSMODL";  // 8 bytes on disk

FeatureSelection identity_selection(const std::vector<std::string>& names, Eigen::Index cols) {
  FeatureSelection sel;
  sel.kept.resize(static_cast<std::size_t>(cols));
  sel.importance.assign(static_cast<std::size_t>(cols),
                        1.0 / static_cast<double>(std::max<Eigen::Index>(cols, 1)));
  for (Eigen::Index c = 0; c < cols; ++c) {
    sel.kept[static_cast<std::size_t>(c)] = static_cast<int>(c);
    sel.kept_names.push_back(static_cast<std::size_t>(c) < names.size()
                                 ? names[static_cast<std::size_t>(c)]
                                 : "f" + std::to_string(c));
  }
  return sel;
}

// ---- container payloads -------------------------------------------------

std::string pack_scaler(const ZScoreScaler& s) {
  BinWriter w;
  w.vec(s.mean);
  w.vec(s.stddev);
  return w.buffer();
}

ZScoreScaler unpack_scaler(const std::string& payload) {
  BinReader r(payload);
  ZScoreScaler s;
  s.mean = r.vec();
  s.stddev = r.vec();
  return s;
}

std::string pack_selection(const FeatureSelection& sel) {
  BinWriter w;
  w.integer(static_cast<std::int64_t>(sel.kept.size()));
  for (int k : sel.kept) w.integer(k);
  for (double v : sel.importance) w.real(v);
  for (const std::string& n : sel.kept_names) w.text(n);
  return w.buffer();
}

FeatureSelection unpack_selection(const std::string& payload) {
  BinReader r(payload);
  FeatureSelection sel;
  const std::int64_t n = r.integer();
  sel.kept.resize(static_cast<std::size_t>(n));
  sel.importance.resize(static_cast<std::size_t>(n));
  sel.kept_names.resize(static_cast<std::size_t>(n));
  for (auto& k : sel.kept) k = static_cast<int>(r.integer());
  for (auto& v : sel.importance) v = r.real();
  for (auto& s : sel.kept_names) s = r.text();
  return sel;
}

std::string pack_kpca(const KpcaModel& m) {
  BinWriter w;
  w.integer(static_cast<std::int64_t>(m.kernel));
  w.real(m.gamma);
  w.integer(m.degree);
  w.real(m.coef0);
  w.mat(m.rows);
  w.mat(m.alphas);
  w.vec(m.eigenvalues);
  w.vec(m.row_mean);
  w.real(m.grand_mean);
  return w.buffer();
}

KpcaModel unpack_kpca(const std::string& payload) {
  BinReader r(payload);
  KpcaModel m;
  m.kernel = static_cast<KernelKind>(r.integer());
  m.gamma = r.real();
  m.degree = static_cast<int>(r.integer());
  m.coef0 = r.real();
  m.rows = r.mat();
  m.alphas = r.mat();
  m.eigenvalues = r.vec();
  m.row_mean = r.vec();
  m.grand_mean = r.real();
  return m;
}

void pack_hyperparams(BinWriter& w, const TreeHyperparams& hp) {
  w.integer(hp.max_depth);
  w.integer(hp.min_samples_split);
  w.integer(hp.min_samples_leaf);
  w.integer(hp.max_leaf_nodes);
  w.integer(static_cast<std::int64_t>(hp.max_features.mode));
  w.real(hp.max_features.value);
  w.integer(hp.n_estimators);
  w.real(hp.learning_rate);
  w.real(hp.lambda_l2);
  w.real(hp.row_subsample);
  w.integer(hp.bootstrap ? 1 : 0);
  w.uint64(hp.seed);
}

TreeHyperparams unpack_hyperparams(BinReader& r) {
  TreeHyperparams hp;
  hp.max_depth = static_cast<int>(r.integer());
  hp.min_samples_split = static_cast<int>(r.integer());
  hp.min_samples_leaf = static_cast<int>(r.integer());
  hp.max_leaf_nodes = static_cast<int>(r.integer());
  hp.max_features.mode = static_cast<MaxFeatures::Mode>(r.integer());
  hp.max_features.value = r.real();
  hp.n_estimators = static_cast<int>(r.integer());
  hp.learning_rate = r.real();
  hp.lambda_l2 = r.real();
  hp.row_subsample = r.real();
  hp.bootstrap = r.integer() != 0;
  hp.seed = r.uint64();
  return hp;
}

void pack_ensemble(BinWriter& w, const EnsembleModel& m) {
  w.integer(static_cast<std::int64_t>(m.kind));
  w.integer(m.n_classes);
  w.integer(m.n_features);
  pack_hyperparams(w, m.hp);
  w.integer(static_cast<std::int64_t>(m.base_score.size()));
  for (double v : m.base_score) w.real(v);
  w.integer(static_cast<std::int64_t>(m.trees.size()));
  for (const Tree& t : m.trees) {
    w.integer(static_cast<std::int64_t>(t.nodes.size()));
    for (const TreeNode& n : t.nodes) {
      w.integer(n.feature);
      w.real(n.threshold);
      w.integer(n.left);
      w.integer(n.right);
      w.integer(static_cast<std::int64_t>(n.dist.size()));
      for (double v : n.dist) w.real(v);
    }
  }
}

EnsembleModel unpack_ensemble(BinReader& r) {
  EnsembleModel m;
  m.kind = static_cast<LearnerKind>(r.integer());
  m.n_classes = static_cast<int>(r.integer());
  m.n_features = static_cast<int>(r.integer());
  m.hp = unpack_hyperparams(r);
  m.base_score.resize(static_cast<std::size_t>(r.integer()));
  for (auto& v : m.base_score) v = r.real();
  m.trees.resize(static_cast<std::size_t>(r.integer()));
  for (Tree& t : m.trees) {
    t.nodes.resize(static_cast<std::size_t>(r.integer()));
    for (TreeNode& n : t.nodes) {
      n.feature = static_cast<int>(r.integer());
      n.threshold = r.real();
      n.left = static_cast<int>(r.integer());
      n.right = static_cast<int>(r.integer());
      n.dist.resize(static_cast<std::size_t>(r.integer()));
      for (auto& v : n.dist) v = r.real();
    }
  }
  return m;
}

std::string pack_stack(const StackedModel& s) {
  BinWriter w;
  w.integer(static_cast<std::int64_t>(s.bases.size()));
  for (const EnsembleModel& b : s.bases) pack_ensemble(w, b);
  pack_ensemble(w, s.meta);
  w.integer(static_cast<std::int64_t>(s.best_base));
  pack_hyperparams(w, s.best_base_hp);
  w.integer(s.meta_probabilities ? 1 : 0);
  w.integer(s.n_classes);
  w.integer(static_cast<std::int64_t>(s.base_cv_macro_f1.size()));
  for (double v : s.base_cv_macro_f1) w.real(v);
  return w.buffer();
}

StackedModel unpack_stack(const std::string& payload) {
  BinReader r(payload);
  StackedModel s;
  s.bases.resize(static_cast<std::size_t>(r.integer()));
  for (EnsembleModel& b : s.bases) b = unpack_ensemble(r);
  s.meta = unpack_ensemble(r);
  s.best_base = static_cast<LearnerKind>(r.integer());
  s.best_base_hp = unpack_hyperparams(r);
  s.meta_probabilities = r.integer() != 0;
  s.n_classes = static_cast<int>(r.integer());
  s.base_cv_macro_f1.resize(static_cast<std::size_t>(r.integer()));
  for (auto& v : s.base_cv_macro_f1) v = r.real();
  return s;
}

std::string pack_anomaly(const AnomalyModel& a) {
  BinWriter w;
  w.mat(a.clm.km.centroids);
  w.integer(static_cast<std::int64_t>(a.clm.km.distance));
  w.real(a.clm.km.inertia);
  w.integer(static_cast<std::int64_t>(a.clm.km.objective_trace.size()));
  for (double v : a.clm.km.objective_trace) w.real(v);
  w.integer(static_cast<std::int64_t>(a.clm.labels.size()));
  for (int v : a.clm.labels) w.integer(v);
  for (double v : a.clm.purity) w.real(v);
  w.real(a.clm.p_star);
  w.integer(a.fn_corrector.has_value() ? 1 : 0);
  if (a.fn_corrector.has_value()) pack_ensemble(w, *a.fn_corrector);
  w.integer(a.fp_corrector.has_value() ? 1 : 0);
  if (a.fp_corrector.has_value()) pack_ensemble(w, *a.fp_corrector);
  return w.buffer();
}

AnomalyModel unpack_anomaly(const std::string& payload) {
  BinReader r(payload);
  AnomalyModel a;
  a.clm.km.centroids = r.mat();
  a.clm.km.distance = static_cast<Distance>(r.integer());
  a.clm.km.inertia = r.real();
  a.clm.km.objective_trace.resize(static_cast<std::size_t>(r.integer()));
  for (auto& v : a.clm.km.objective_trace) v = r.real();
  const std::size_t clusters = static_cast<std::size_t>(r.integer());
  a.clm.labels.resize(clusters);
  a.clm.purity.resize(clusters);
  for (auto& v : a.clm.labels) v = static_cast<int>(r.integer());
  for (auto& v : a.clm.purity) v = r.real();
  a.clm.p_star = r.real();
  if (r.integer() != 0) a.fn_corrector = unpack_ensemble(r);
  if (r.integer() != 0) a.fp_corrector = unpack_ensemble(r);
  return a;
}

std::string pack_registry(const PipelineModel& p) {
  BinWriter w;
  w.integer(static_cast<std::int64_t>(p.class_names.size()));
  for (const std::string& n : p.class_names) w.text(n);
  for (std::uint8_t f : p.attack_class) w.integer(f);
  w.integer(p.normal_class);
  w.integer(static_cast<std::int64_t>(p.feature_names.size()));
  for (const std::string& n : p.feature_names) w.text(n);
  return w.buffer();
}

void unpack_registry(const std::string& payload, PipelineModel& p) {
  BinReader r(payload);
  const std::size_t classes = static_cast<std::size_t>(r.integer());
  p.class_names.resize(classes);
  p.attack_class.resize(classes);
  for (auto& n : p.class_names) n = r.text();
  for (auto& f : p.attack_class) f = static_cast<std::uint8_t>(r.integer());
  p.normal_class = static_cast<int>(r.integer());
  p.feature_names.resize(static_cast<std::size_t>(r.integer()));
  for (auto& n : p.feature_names) n = r.text();
}

}  // namespace

const char* verdict_kind_name(VerdictKind k) {
  switch (k) {
    case VerdictKind::Normal: return "normal";
    case VerdictKind::Known: return "known";
    case VerdictKind::UnknownAttack: return "unknown_attack";
  }
  return "?";
}

bool verdict_is_attack(const Verdict& v) { return v.kind != VerdictKind::Normal; }

Verdict PipelineModel::detect(const Vector& raw_row, DetectStats* stats) const {
  std::size_t visits = 0;
  const Vector scaled = zscore_apply_row(scaler, raw_row);
  const Vector sel = selection.apply_row(scaled);

  const Vector proba = stack.predict_proba(sel, &visits);
  int cls = 0;
  for (Eigen::Index c = 1; c < proba.size(); ++c) {
    if (proba[c] > proba[cls]) cls = static_cast<int>(c);
  }
  Verdict v;
  if (attack_class[static_cast<std::size_t>(cls)] != 0) {
    v.kind = VerdictKind::Known;
    v.class_index = cls;
    v.confidence = proba[cls];
    v.tier_trace = {1};
    if (stats != nullptr) {
      stats->node_visits += visits;
      stats->tiers_fired = 1;
    }
    return v;
  }

  const Vector z = kpca_transform_row(kpca, sel);
  const ClusterVerdict cv = cluster_assign(anomaly.clm, z);
  if (stats != nullptr) {
    stats->distance_evals += static_cast<std::size_t>(anomaly.clm.km.centroids.rows());
  }
  const std::optional<EnsembleModel>& guard =
      (cv.label == 0) ? anomaly.fn_corrector : anomaly.fp_corrector;
  if (cv.p >= anomaly.clm.p_star || !guard.has_value()) {
    v.kind = cv.label == 1 ? VerdictKind::UnknownAttack : VerdictKind::Normal;
    v.class_index = cv.label == 1 ? -1 : normal_class;
    v.confidence = cv.p;
    v.tier_trace = {1, 3};
  } else {
    const double p_att = corrector_attack_probability(*guard, z, &visits);
    const bool attack = p_att >= 0.5;
    v.kind = attack ? VerdictKind::UnknownAttack : VerdictKind::Normal;
    v.class_index = attack ? -1 : normal_class;
    v.confidence = attack ? p_att : 1.0 - p_att;
    v.tier_trace = {1, 3, 4};
  }
  if (stats != nullptr) {
    stats->node_visits += visits;
    stats->tiers_fired = v.tier_trace.size();
  }
  return v;
}

std::vector<Verdict> PipelineModel::detect_batch(const Matrix& rows) const {
  std::vector<Verdict> out(static_cast<std::size_t>(rows.rows()));
  parallel_for(out.size(), [&](std::size_t i) {
    out[i] = detect(rows.row(static_cast<Eigen::Index>(i)).transpose());
  });
  return out;
}

PipelineModel train_pipeline(const LabeledDataset& train, const Config& cfg,
                             TrainDiagnostics* diag) {
  const auto started = std::chrono::steady_clock::now();
  if (train.rows() == 0) throw DataError("training set is empty");
  if (train.class_names.size() < 2) throw DataError("training set needs at least two classes");
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));

  int normal_class = -1;
  for (std::size_t c = 0; c < train.attack_class.size(); ++c) {
    if (train.attack_class[c] == 0) {
      if (normal_class >= 0) throw DataError("training set has several normal classes");
      normal_class = static_cast<int>(c);
    }
  }
  if (normal_class < 0) throw DataError("training set has no normal class");

  std::vector<std::string>* warnings = diag != nullptr ? &diag->warnings : nullptr;

  LabeledDataset working = train;
  const std::size_t smote_target =
      static_cast<std::size_t>(std::max<std::int64_t>(cfg.get_int("smote.target_count", 0), 0));
  if (smote_target > 0) {
    SmoteConfig sc;
    sc.k_neighbors = static_cast<int>(cfg.get_int("smote.k_neighbors", 5));
    sc.target_count = smote_target;
    sc.seed = mix_seed(seed, 0x510e);
    const std::size_t before = working.rows();
    working = smote(working, sc, warnings);
    if (diag != nullptr) diag->smote_added = working.rows() - before;
  }

  PipelineModel model;
  model.class_names = working.class_names;
  model.attack_class = working.attack_class;
  model.normal_class = normal_class;
  model.feature_names = working.feature_names;

  model.scaler = zscore_fit(working.features);
  LabeledDataset scaled = working;
  scaled.features = zscore_apply(model.scaler, working.features);

  if (cfg.get_bool("features.enabled", true)) {
    BinningRule rule;
    rule.bins = static_cast<int>(cfg.get_int("features.bins", 20));
    const double alpha_ig = cfg.get_real("features.alpha_ig", 0.9);
    const double alpha_su = cfg.get_real("features.alpha_su", 0.9);
    const FeatureSelection ranked = ig_select(scaled, alpha_ig, rule, warnings);
    model.selection = fcbf_filter(scaled, ranked, alpha_su, rule);
  } else {
    model.selection = identity_selection(working.feature_names, scaled.features.cols());
  }
  if (diag != nullptr) diag->selected_features = model.selection.kept_names;

  const Matrix x_sel = model.selection.apply(scaled.features);
  const int n_classes = static_cast<int>(working.class_names.size());

  StackConfig stack_cfg;
  stack_cfg.hpo_budget = static_cast<int>(cfg.get_int("stack.budget", 50));
  stack_cfg.hpo_cv_folds = static_cast<int>(cfg.get_int("stack.cv_folds", 10));
  stack_cfg.oof_folds = static_cast<int>(cfg.get_int("stack.oof_folds", 5));
  stack_cfg.meta_probabilities = cfg.get_bool("stack.meta_probabilities", false);
  stack_cfg.max_depth_cap = static_cast<int>(cfg.get_int("stack.max_depth_cap", 24));
  stack_cfg.estimators_cap = static_cast<int>(cfg.get_int("stack.estimators_cap", 150));
  stack_cfg.seed = mix_seed(seed, 0x57ac);
  model.stack = train_signature_tier(x_sel, working.labels, n_classes, stack_cfg,
                                     diag != nullptr ? &diag->stack : nullptr);

  KpcaConfig kcfg;
  kcfg.kernel = kernel_from_name(cfg.get_string("kpca.kernel", "rbf"));
  kcfg.gamma = cfg.get_real("kpca.gamma", 0.0);
  kcfg.degree = static_cast<int>(cfg.get_int("kpca.degree", 3));
  kcfg.coef0 = cfg.get_real("kpca.coef0", 1.0);
  kcfg.components = static_cast<int>(cfg.get_int("kpca.components", 8));
  kcfg.max_fit_rows = static_cast<std::size_t>(cfg.get_int("kpca.max_fit_rows", 2000));
  kcfg.seed = mix_seed(seed, 0x6bca);
  model.kpca = kpca_fit(x_sel, kcfg, warnings);
  const Matrix z = kpca_transform(model.kpca, x_sel);

  std::vector<int> y01(working.labels.size());
  for (std::size_t i = 0; i < y01.size(); ++i) {
    y01[i] = working.attack_class[static_cast<std::size_t>(working.labels[i])] != 0 ? 1 : 0;
  }
  AnomalyConfig acfg;
  acfg.k_lo = static_cast<int>(cfg.get_int("anomaly.k_lo", 8));
  acfg.k_hi = static_cast<int>(cfg.get_int("anomaly.k_hi", 512));
  acfg.gp_budget = static_cast<int>(cfg.get_int("anomaly.budget", 20));
  acfg.p_star = cfg.get_real("anomaly.p_star", 0.933);
  acfg.tune_p_star = cfg.get_bool("anomaly.tune_p_star", false);
  acfg.p_star_budget = static_cast<int>(cfg.get_int("anomaly.p_star_budget", 20));
  acfg.minibatch = static_cast<int>(cfg.get_int("anomaly.minibatch", 4096));
  acfg.max_iter = static_cast<int>(cfg.get_int("anomaly.max_iter", 100));
  acfg.holdout_fraction = cfg.get_real("anomaly.holdout_fraction", 0.2);
  acfg.enable_correctors = cfg.get_bool("anomaly.correctors", true);
  acfg.corrector_kind = model.stack.best_base;
  acfg.corrector_hp = model.stack.best_base_hp;
  acfg.seed = mix_seed(seed, 0xa707);
  model.anomaly = train_anomaly_tier(z, y01, acfg, diag != nullptr ? &diag->anomaly : nullptr);
  if (diag != nullptr) {
    diag->warnings.insert(diag->warnings.end(), diag->stack.warnings.begin(),
                          diag->stack.warnings.end());
    diag->warnings.insert(diag->warnings.end(), diag->anomaly.warnings.begin(),
                          diag->anomaly.warnings.end());
    diag->train_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  }
  return model;
}

std::string pipeline_bytes(const PipelineModel& p) {
  BinWriter out;
  std::string head(kMagic, kMagic + 8);
  const std::uint32_t version = PipelineModel::format_version;
  for (int i = 0; i < 4; ++i) {
    head.push_back(static_cast<char>((version >> (8 * i)) & 0xffu));
  }
  out.section(pack_scaler(p.scaler));
  out.section(pack_selection(p.selection));
  out.section(pack_kpca(p.kpca));
  out.section(pack_stack(p.stack));
  out.section(pack_anomaly(p.anomaly));
  out.section(pack_registry(p));
  return head + out.buffer();
}

void save_pipeline(const PipelineModel& p, const std::string& path) {
  write_file_bytes(path, pipeline_bytes(p));
}

PipelineModel load_pipeline(const std::string& path) {
  const std::string bytes = read_file_bytes(path);
  if (bytes.size() < 12 || bytes.compare(0, 8, kMagic, 8) != 0) {
    throw DataError("not a pipeline model file: " + path);
  }
  std::uint32_t version = 0;
  for (int i = 0; i < 4; ++i) {
    version |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[8 + i])) << (8 * i);
  }
  if (version != PipelineModel::format_version) {
    throw DataError("pipeline format version " + std::to_string(version) +
                    " unsupported, expected " + std::to_string(PipelineModel::format_version));
  }
  BinReader r(bytes.substr(12));
  PipelineModel p;
  p.scaler = unpack_scaler(r.section());
  p.selection = unpack_selection(r.section());
  p.kpca = unpack_kpca(r.section());
  p.stack = unpack_stack(r.section());
  p.anomaly = unpack_anomaly(r.section());
  unpack_registry(r.section(), p);
  if (!r.done()) throw DataError("pipeline model file has trailing bytes");
  return p;
}

}  // namespace tids
