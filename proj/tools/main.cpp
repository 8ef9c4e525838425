// command-line front end: ingest raw captures, subsample, train, evaluate and
// serve verdicts from one binary. every knob that is not a file path comes
// from the key=value config so runs are reproducible from a single file.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tids/config.hpp"
#include "tids/csv.hpp"
#include "tids/dataset.hpp"
#include "tids/errors.hpp"
#include "tids/kmeans.hpp"
#include "tids/latency.hpp"
#include "tids/metrics.hpp"
#include "tids/parallel.hpp"
#include "tids/pipeline.hpp"
#include "tids/protocol.hpp"
#include "tids/scaler.hpp"
#include "tids/search_space.hpp"
#include "tids/synth.hpp"

namespace {

using namespace tids;

struct GlobalOpts {
  std::string config_path;
  long long seed = -1;  // <0 keeps the config value
  int threads = 1;
};

Config make_config(const GlobalOpts& g) {
  set_worker_threads(g.threads);
  Config cfg = g.config_path.empty() ? Config() : Config::from_file(g.config_path);
  if (g.seed >= 0) cfg.set("seed", std::to_string(g.seed));
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << text;
  if (!out) throw DataError("write failed: " + path);
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cout << "warning: " << w << "\n";
}

void print_load_report(const LoadReport& rep) {
  std::cout << "rows read " << rep.rows_total << ", rejected " << rep.rows_rejected << "\n";
  for (const auto& e : rep.errors) std::cout << "  reject " << e << "\n";
  if (rep.rows_rejected > rep.errors.size())
    std::cout << "  ... " << (rep.rows_rejected - rep.errors.size()) << " more\n";
}

void print_class_table(const LabeledDataset& d) {
  auto counts = d.class_counts();
  for (std::size_t c = 0; c < d.class_names.size(); ++c)
    std::printf("  %-24s %8zu rows  (%s)\n", d.class_names[c].c_str(), counts[c],
                d.attack_class[c] ? "attack" : "normal");
}

double double_field(const Config& cfg, const std::string& key, double fallback) {
  return cfg.get_real(key, fallback);
}

// ---- ingest ----------------------------------------------------------------

struct IngestOpts {
  std::string format = "flow";
  std::vector<std::string> inputs;
  std::vector<std::string> attack_names;  // per CAN flag-file, same order as inputs
  bool can_label_column = false;
  std::string out;
  std::string report_csv;
};

int run_ingest(const IngestOpts& o, const Config&) {
  LoadReport rep;
  std::vector<LabeledDataset> parts;
  if (o.format == "can") {
    if (!o.can_label_column && o.attack_names.size() != o.inputs.size())
      throw ConfigError("flag-column CAN ingest needs one --attack-name per --input");
    for (std::size_t i = 0; i < o.inputs.size(); ++i) {
      CanLabelPolicy policy;
      if (o.can_label_column) {
        policy.kind = CanLabelPolicy::Kind::LabelColumn;
      } else {
        policy.kind = CanLabelPolicy::Kind::FlagColumn;
        policy.attack_name = o.attack_names[i];
      }
      parts.push_back(load_can_csv(o.inputs[i], policy, &rep));
    }
  } else if (o.format == "flow") {
    for (const auto& path : o.inputs) parts.push_back(load_flow_csv(path, &rep));
  } else {
    throw ConfigError("unknown ingest format: " + o.format);
  }

  LabeledDataset merged = parts.size() == 1 ? std::move(parts.front()) : merge_datasets(parts);
  SanitizeReport san;
  LabeledDataset clean = sanitize(merged, &san);
  write_canonical_csv(clean, o.out);

  print_load_report(rep);
  std::cout << "repaired cells " << san.repaired_cells << "\n";
  for (const auto& c : san.constant_columns) std::cout << "  constant column: " << c << "\n";
  std::cout << "wrote " << clean.rows() << " rows x " << clean.cols() << " features to " << o.out
            << "\n";
  print_class_table(clean);

  if (!o.report_csv.empty()) {
    std::string csv = "key,value\n";
    csv += "rows_read," + std::to_string(rep.rows_total) + "\n";
    csv += "rows_rejected," + std::to_string(rep.rows_rejected) + "\n";
    csv += "repaired_cells," + std::to_string(san.repaired_cells) + "\n";
    auto counts = clean.class_counts();
    for (std::size_t c = 0; c < clean.class_names.size(); ++c)
      csv += "class." + clean.class_names[c] + "," + std::to_string(counts[c]) + "\n";
    write_text(o.report_csv, csv);
  }
  return 0;
}

// ---- sample ----------------------------------------------------------------

struct SampleOpts {
  std::string input;
  std::string out;
  double fraction = 0.1;
  int k = 0;  // 0 tunes k by silhouette
  int k_lo = 2;
  int k_hi = 32;
  int budget = 15;
  std::string distance = "euclidean";
  std::string report_csv;
};

int run_sample(const SampleOpts& o, const Config& cfg) {
  LabeledDataset d = sanitize(load_flow_csv(o.input));
  auto seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  KMeansOptions opts;
  opts.seed = seed;
  opts.minibatch = static_cast<std::size_t>(cfg.get_int("sample.minibatch", 4096));
  Distance dist = distance_from_name(o.distance);

  KMeansModel m;
  double sil = 0.0;
  int k_used = o.k;
  if (o.k > 0) {
    m = kmeans_fit(d.features, o.k, dist, opts);
  } else {
    TuneKResult r = tune_k(d.features, o.k_lo, o.k_hi, o.budget, dist, opts);
    m = std::move(r.model);
    k_used = r.k;
    sil = r.score;
    std::printf("tuned k = %d (silhouette %.4f)\n", k_used, sil);
  }
  LabeledDataset sampled = cluster_sample(d, m, o.fraction, seed);
  write_canonical_csv(sampled, o.out);

  std::cout << "kept " << sampled.rows() << " of " << d.rows() << " rows across " << k_used
            << " clusters -> " << o.out << "\n";
  print_class_table(sampled);

  if (!o.report_csv.empty()) {
    std::string csv = "key,value\n";
    csv += "rows_in," + std::to_string(d.rows()) + "\n";
    csv += "rows_out," + std::to_string(sampled.rows()) + "\n";
    csv += "k," + std::to_string(k_used) + "\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", sil);
    csv += std::string("silhouette,") + buf + "\n";
    write_text(o.report_csv, csv);
  }
  return 0;
}

// ---- train / tune ----------------------------------------------------------

struct TrainOpts {
  std::string input;
  std::string model_out;
  double holdout = 0.0;  // >0 keeps a stratified test share and scores it
  std::string report_csv;
  std::string stack_trials_csv;
  std::string anomaly_trials_csv;
};

void print_train_summary(const PipelineModel& model, const TrainDiagnostics& diag) {
  std::cout << "selected " << model.selection.kept.size() << " of " << model.feature_names.size()
            << " features:";
  for (const auto& name : model.selection.kept_names) std::cout << " " << name;
  std::cout << "\n";
  if (diag.smote_added > 0) std::cout << "balancing synthesized " << diag.smote_added << " rows\n";
  static const char* kBaseNames[] = {"tree", "bagging", "extra", "boosted"};
  for (std::size_t b = 0; b < model.stack.base_cv_macro_f1.size() && b < 4; ++b)
    std::printf("  base %-8s cv macro-F1 %.5f\n", kBaseNames[b], model.stack.base_cv_macro_f1[b]);
  std::cout << "best base: " << learner_name(model.stack.best_base) << "\n";
  std::printf("clustering: k=%d (%s), labeling accuracy %.5f, p* %.4f\n", diag.anomaly.chosen_k,
              distance_name(diag.anomaly.chosen_distance), diag.anomaly.validation_accuracy,
              model.anomaly.clm.p_star);
  std::cout << "training misses " << diag.anomaly.fn_count << ", false alarms "
            << diag.anomaly.fp_count << "; correctors:"
            << (model.anomaly.fn_corrector ? " miss-guard" : "")
            << (model.anomaly.fp_corrector ? " alarm-guard" : "")
            << (!model.anomaly.fn_corrector && !model.anomaly.fp_corrector ? " none" : "") << "\n";
  std::printf("train time %.1f s\n", diag.train_seconds);
  print_warnings(diag.warnings);
}

// holdout scoring: multi-class table from the supervised tier, binary rates
// from full verdict routing (same convention as cross_validate)
MetricsReport score_split(const PipelineModel& model, const LabeledDataset& test) {
  std::vector<int> stack_pred;
  std::vector<bool> routed_attack;
  std::vector<bool> truth_attack;
  stack_pred.reserve(test.rows());
  for (std::size_t i = 0; i < test.rows(); ++i) {
    Vector raw = test.features.row(static_cast<Eigen::Index>(i)).transpose();
    Vector z = model.selection.apply_row(zscore_apply_row(model.scaler, raw));
    Vector proba = model.stack.predict_proba(z);
    int best = 0;
    for (int c = 1; c < static_cast<int>(proba.size()); ++c)
      if (proba[c] > proba[best]) best = c;
    stack_pred.push_back(best);
    routed_attack.push_back(verdict_is_attack(model.detect(raw)));
    truth_attack.push_back(test.attack_class[static_cast<std::size_t>(test.labels[i])] != 0);
  }
  MetricsReport rep = compute_metrics(stack_pred, test.labels, test.attack_class);
  MetricsReport bin = metrics_from_binary(binary_counts(routed_attack, truth_attack));
  rep.binary = bin.binary;
  rep.accuracy = bin.accuracy;
  rep.detection_rate = bin.detection_rate;
  rep.false_alarm_rate = bin.false_alarm_rate;
  rep.f1 = bin.f1;
  return rep;
}

int run_train(const TrainOpts& o, const Config& cfg) {
  LabeledDataset d = sanitize(load_flow_csv(o.input));
  LabeledDataset train = d;
  LabeledDataset test;
  if (o.holdout > 0.0) {
    SplitSpec spec;
    spec.train_fraction = 1.0 - o.holdout;
    spec.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
    auto [tr, te] = split_holdout(d, spec);
    train = std::move(tr);
    test = std::move(te);
  }

  TrainDiagnostics diag;
  PipelineModel model = train_pipeline(train, cfg, &diag);
  std::cout << "trained on " << train.rows() << " rows, " << train.class_names.size()
            << " classes\n";
  print_train_summary(model, diag);

  if (!o.model_out.empty()) {
    save_pipeline(model, o.model_out);
    std::cout << "model " << pipeline_bytes(model).size() << " bytes -> " << o.model_out << "\n";
  }
  if (!o.stack_trials_csv.empty()) write_text(o.stack_trials_csv, trials_to_csv(diag.stack.tuning_trials));
  if (!o.anomaly_trials_csv.empty())
    write_text(o.anomaly_trials_csv, trials_to_csv(diag.anomaly.tuning_trials));

  if (test.rows() > 0) {
    MetricsReport rep = score_split(model, test);
    std::cout << "holdout (" << test.rows() << " rows):\n" << rep.table(test.class_names);
    if (!o.report_csv.empty()) {
      char buf[256];
      std::snprintf(buf, sizeof(buf), "accuracy,dr,far,f1,macro_f1\n%.6f,%.6f,%.6f,%.6f,%.6f\n",
                    rep.accuracy, rep.detection_rate, rep.false_alarm_rate, rep.f1, rep.macro_f1);
      write_text(o.report_csv, buf);
    }
  }
  return 0;
}

struct TuneOpts {
  std::string input;
  std::string stack_trials_csv;
  std::string anomaly_trials_csv;
};

int run_tune(const TuneOpts& o, const Config& cfg) {
  LabeledDataset d = sanitize(load_flow_csv(o.input));
  TrainDiagnostics diag;
  PipelineModel model = train_pipeline(d, cfg, &diag);

  static const char* kBaseNames[] = {"tree", "bagging", "extra", "boosted"};
  for (std::size_t b = 0; b < diag.stack.tuned.size() && b < 4; ++b) {
    const TreeHyperparams& hp = diag.stack.tuned[b];
    std::printf("%-8s depth %-3d split %-3d leaf %-3d estimators %-4d lr %.3f  cv macro-F1 %.5f\n",
                kBaseNames[b], hp.max_depth, hp.min_samples_split, hp.min_samples_leaf,
                hp.n_estimators, hp.learning_rate, model.stack.base_cv_macro_f1[b]);
  }
  std::cout << "best base: " << learner_name(model.stack.best_base) << "\n";
  std::printf("clustering: k=%d (%s), labeling accuracy %.5f, p* %.4f\n", diag.anomaly.chosen_k,
              distance_name(diag.anomaly.chosen_distance), diag.anomaly.validation_accuracy,
              model.anomaly.clm.p_star);
  std::cout << diag.stack.tuning_trials.size() << " supervised trials, "
            << diag.anomaly.tuning_trials.size() << " clustering trials\n";
  print_warnings(diag.warnings);

  if (!o.stack_trials_csv.empty()) write_text(o.stack_trials_csv, trials_to_csv(diag.stack.tuning_trials));
  if (!o.anomaly_trials_csv.empty())
    write_text(o.anomaly_trials_csv, trials_to_csv(diag.anomaly.tuning_trials));
  return 0;
}

// ---- detect ----------------------------------------------------------------

struct DetectOpts {
  std::string model_path;
  std::string input;
  std::string out;  // empty = stdout
};

std::string verdict_line(std::size_t index, const Verdict& v,
                         const std::vector<std::string>& class_names) {
  std::string line = std::to_string(index);
  line += ',';
  line += verdict_kind_name(v.kind);
  line += ',';
  line += v.class_index >= 0 ? class_names[static_cast<std::size_t>(v.class_index)] : "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), ",%.6f,", v.confidence);
  line += buf;
  for (std::size_t t = 0; t < v.tier_trace.size(); ++t) {
    if (t > 0) line += '|';
    line += std::to_string(v.tier_trace[t]);
  }
  return line;
}

int run_detect(const DetectOpts& o, const Config&) {
  PipelineModel model = load_pipeline(o.model_path);
  LoadReport rep;
  FeatureTable t = load_feature_csv(o.input, &rep);
  if (t.features.cols() != static_cast<Eigen::Index>(model.feature_names.size()))
    throw DataError("model expects " + std::to_string(model.feature_names.size()) +
                    " features, input has " + std::to_string(t.features.cols()));
  if (t.feature_names != model.feature_names)
    std::cerr << "warning: input feature names differ from the model's; matching by position\n";

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!o.out.empty()) {
    file.open(o.out, std::ios::binary);
    if (!file) throw DataError("cannot write file: " + o.out);
    out = &file;
  }
  *out << "index,kind,class,confidence,tiers\n";
  std::map<std::string, std::size_t> tally;
  for (Eigen::Index i = 0; i < t.features.rows(); ++i) {
    Verdict v = model.detect(t.features.row(i).transpose());
    *out << verdict_line(static_cast<std::size_t>(i), v, model.class_names) << "\n";
    ++tally[verdict_kind_name(v.kind)];
  }
  if (rep.rows_rejected > 0)
    std::cerr << "warning: " << rep.rows_rejected << " malformed rows skipped\n";
  for (const auto& [kind, n] : tally) std::cerr << kind << " " << n << "\n";
  return 0;
}

// ---- zeroDay ---------------------------------------------------------------

struct ZeroDayOpts {
  std::string input;
  std::vector<std::string> attacks;  // empty = every attack class
  std::string report_csv;
};

int run_zero_day(const ZeroDayOpts& o, const Config& cfg) {
  LabeledDataset d = sanitize(load_flow_csv(o.input));
  std::vector<std::string> attacks = o.attacks;
  if (attacks.empty())
    for (std::size_t c = 0; c < d.class_names.size(); ++c)
      if (d.attack_class[c]) attacks.push_back(d.class_names[c]);

  std::string csv = "attack,arm,rows,dr,far,f1\n";
  double full_sum = 0.0, ablation_sum = 0.0;
  for (const auto& name : attacks) {
    ZeroDayReport rep = zero_day_eval(d, name, cfg);
    std::printf("%-16s rows %-6zu full     DR %.5f FAR %.5f F1 %.5f\n", name.c_str(),
                rep.validation_rows, rep.full.detection_rate, rep.full.false_alarm_rate,
                rep.full.f1);
    std::printf("%-16s %-11s clusters DR %.5f FAR %.5f F1 %.5f\n", "", "",
                rep.ablation.detection_rate, rep.ablation.false_alarm_rate, rep.ablation.f1);
    print_warnings(rep.warnings);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s,full,%zu,%.6f,%.6f,%.6f\n", name.c_str(),
                  rep.validation_rows, rep.full.detection_rate, rep.full.false_alarm_rate,
                  rep.full.f1);
    csv += buf;
    std::snprintf(buf, sizeof(buf), "%s,clusters,%zu,%.6f,%.6f,%.6f\n", name.c_str(),
                  rep.validation_rows, rep.ablation.detection_rate,
                  rep.ablation.false_alarm_rate, rep.ablation.f1);
    csv += buf;
    full_sum += rep.full.f1;
    ablation_sum += rep.ablation.f1;
  }
  if (attacks.size() > 1) {
    std::printf("average F1: full %.5f, clusters-only %.5f\n",
                full_sum / static_cast<double>(attacks.size()),
                ablation_sum / static_cast<double>(attacks.size()));
  }
  if (!o.report_csv.empty()) write_text(o.report_csv, csv);
  return 0;
}

// ---- cv --------------------------------------------------------------------

struct CvOpts {
  std::string input;
  int folds = 10;
  std::string report_csv;
};

int run_cv(const CvOpts& o, const Config& cfg) {
  LabeledDataset d = sanitize(load_flow_csv(o.input));
  CvReport rep = cross_validate(d, cfg, o.folds);
  std::cout << rep.folds_used << "-fold cross-validation, mean over folds:\n"
            << rep.mean.table(d.class_names);
  std::printf("mean train %.1f s, eval %.1f s per fold\n", rep.mean.train_seconds,
              rep.mean.eval_seconds);
  print_warnings(rep.warnings);

  std::string csv = "fold,accuracy,dr,far,f1,macro_f1\n";
  char buf[160];
  for (std::size_t f = 0; f < rep.folds.size(); ++f) {
    const auto& m = rep.folds[f];
    std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f,%.6f,%.6f,%.6f\n", f, m.accuracy,
                  m.detection_rate, m.false_alarm_rate, m.f1, m.macro_f1);
    csv += buf;
  }
  std::snprintf(buf, sizeof(buf), "mean,%.6f,%.6f,%.6f,%.6f,%.6f\n", rep.mean.accuracy,
                rep.mean.detection_rate, rep.mean.false_alarm_rate, rep.mean.f1, rep.mean.macro_f1);
  csv += buf;
  if (!o.report_csv.empty()) write_text(o.report_csv, csv);
  return 0;
}

// ---- bench -----------------------------------------------------------------

struct BenchOpts {
  std::string model_path;
  std::string input;
  int rows = 2000;
  int warmup = 50;
  int repeats = 3;
  std::string report_csv;
};

int run_bench(const BenchOpts& o, const Config&) {
  PipelineModel model = load_pipeline(o.model_path);
  FeatureTable t = load_feature_csv(o.input);
  if (t.features.cols() != static_cast<Eigen::Index>(model.feature_names.size()))
    throw DataError("model expects " + std::to_string(model.feature_names.size()) +
                    " features, input has " + std::to_string(t.features.cols()));
  Eigen::Index n = std::min<Eigen::Index>(t.features.rows(), o.rows);
  Matrix rows = t.features.topRows(n);
  BenchReport rep = bench_latency(model, rows, o.warmup, o.repeats);
  std::cout << rep.table();

  if (!o.report_csv.empty()) {
    std::string csv = "stage,mean_ms,p99_ms\n";
    char buf[96];
    auto add = [&](const char* name, const StageStats& s) {
      std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f\n", name, s.mean_ms, s.p99_ms);
      csv += buf;
    };
    add("scaler", rep.scaler);
    add("kpca", rep.kpca);
    add("stack", rep.stack);
    add("cluster", rep.cluster);
    add("corrector", rep.corrector);
    add("total", rep.total);
    csv += "model_bytes," + std::to_string(rep.model_bytes) + ",\n";
    csv += "rows," + std::to_string(rep.rows) + ",\n";
    write_text(o.report_csv, csv);
  }
  return 0;
}

// ---- inspect ---------------------------------------------------------------

int run_inspect(const std::string& model_path) {
  PipelineModel model = load_pipeline(model_path);
  std::cout << "format version " << PipelineModel::format_version << ", "
            << pipeline_bytes(model).size() << " bytes\n";
  std::cout << "raw features " << model.feature_names.size() << ", kept "
            << model.selection.kept.size() << ":";
  for (const auto& n : model.selection.kept_names) std::cout << " " << n;
  std::cout << "\nclasses:\n";
  for (std::size_t c = 0; c < model.class_names.size(); ++c)
    std::printf("  %-24s %s\n", model.class_names[c].c_str(),
                model.attack_class[c] ? "attack" : "normal");

  static const char* kBaseNames[] = {"tree", "bagging", "extra", "boosted"};
  for (std::size_t b = 0; b < model.stack.bases.size() && b < 4; ++b) {
    const EnsembleModel& m = model.stack.bases[b];
    std::size_t nodes = 0;
    for (const auto& t : m.trees) nodes += t.nodes.size();
    std::printf("  base %-8s %3zu trees, %6zu nodes%s\n", kBaseNames[b], m.trees.size(), nodes,
                model.stack.best_base == m.kind ? "  (best)" : "");
  }
  {
    std::size_t nodes = 0;
    for (const auto& t : model.stack.meta.trees) nodes += t.nodes.size();
    std::printf("  meta %-8s %3zu trees, %6zu nodes\n", learner_name(model.stack.meta.kind),
                model.stack.meta.trees.size(), nodes);
  }

  const ClusterLabelModel& clm = model.anomaly.clm;
  int attack_clusters = 0;
  double purity_min = 1.0, purity_sum = 0.0;
  for (std::size_t c = 0; c < clm.labels.size(); ++c) {
    attack_clusters += clm.labels[c];
    purity_min = std::min(purity_min, clm.purity[c]);
    purity_sum += clm.purity[c];
  }
  std::printf("clusters %zu (%s), %d labeled attack, purity min %.3f mean %.3f, p* %.4f\n",
              clm.labels.size(), distance_name(clm.km.distance), attack_clusters, purity_min,
              clm.labels.empty() ? 0.0 : purity_sum / static_cast<double>(clm.labels.size()),
              clm.p_star);
  auto describe_guard = [](const char* name, const std::optional<EnsembleModel>& g) {
    if (g)
      std::printf("  %-12s %s, %zu trees\n", name, learner_name(g->kind), g->trees.size());
    else
      std::printf("  %-12s absent\n", name);
  };
  describe_guard("miss-guard", model.anomaly.fn_corrector);
  describe_guard("alarm-guard", model.anomaly.fp_corrector);
  return 0;
}

// ---- synth -----------------------------------------------------------------

struct SynthOpts {
  std::string kind = "flows";
  std::string out;
};

CanSynthConfig can_synth_config(const Config& cfg) {
  CanSynthConfig s;
  s.normal = static_cast<std::size_t>(cfg.get_int("synth.can.normal", static_cast<std::int64_t>(s.normal)));
  s.dos = static_cast<std::size_t>(cfg.get_int("synth.can.dos", static_cast<std::int64_t>(s.dos)));
  s.fuzzy = static_cast<std::size_t>(cfg.get_int("synth.can.fuzzy", static_cast<std::int64_t>(s.fuzzy)));
  s.gear = static_cast<std::size_t>(cfg.get_int("synth.can.gear", static_cast<std::int64_t>(s.gear)));
  s.rpm = static_cast<std::size_t>(cfg.get_int("synth.can.rpm", static_cast<std::int64_t>(s.rpm)));
  s.fuzzy_overlap = double_field(cfg, "synth.can.fuzzy_overlap", s.fuzzy_overlap);
  s.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<std::int64_t>(s.seed)));
  return s;
}

FlowSynthConfig flow_synth_config(const Config& cfg) {
  FlowSynthConfig s;
  s.benign = static_cast<std::size_t>(cfg.get_int("synth.flow.benign", static_cast<std::int64_t>(s.benign)));
  s.flood = static_cast<std::size_t>(cfg.get_int("synth.flow.flood", static_cast<std::int64_t>(s.flood)));
  s.sweep = static_cast<std::size_t>(cfg.get_int("synth.flow.sweep", static_cast<std::int64_t>(s.sweep)));
  s.bruteforce = static_cast<std::size_t>(
      cfg.get_int("synth.flow.bruteforce", static_cast<std::int64_t>(s.bruteforce)));
  s.webattack = static_cast<std::size_t>(
      cfg.get_int("synth.flow.webattack", static_cast<std::int64_t>(s.webattack)));
  s.botnet = static_cast<std::size_t>(cfg.get_int("synth.flow.botnet", static_cast<std::int64_t>(s.botnet)));
  s.infiltration = static_cast<std::size_t>(
      cfg.get_int("synth.flow.infiltration", static_cast<std::int64_t>(s.infiltration)));
  s.heartbleed = static_cast<std::size_t>(
      cfg.get_int("synth.flow.heartbleed", static_cast<std::int64_t>(s.heartbleed)));
  s.near_fraction = double_field(cfg, "synth.flow.near_fraction", s.near_fraction);
  s.dirty_fraction = double_field(cfg, "synth.flow.dirty_fraction", s.dirty_fraction);
  s.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<std::int64_t>(s.seed)));
  return s;
}

int run_synth(const SynthOpts& o, const Config& cfg) {
  if (o.kind == "can") {
    LabeledDataset d = synth_can(can_synth_config(cfg));
    write_canonical_csv(d, o.out);
    std::cout << "wrote " << d.rows() << " bus frames -> " << o.out << "\n";
    print_class_table(d);
  } else if (o.kind == "flows") {
    std::string csv = synth_flow_csv(flow_synth_config(cfg));
    write_text(o.out, csv);
    std::cout << "wrote flow csv -> " << o.out << "\n";
  } else if (o.kind == "captures") {
    std::filesystem::create_directories(o.out);
    for (const auto& cap : synth_can_captures(can_synth_config(cfg))) {
      std::string path = o.out + "/" + cap.name + ".csv";
      write_text(path, cap.csv);
      std::cout << "wrote " << cap.attack_name << " capture -> " << path << "\n";
    }
  } else {
    throw ConfigError("unknown synth kind: " + o.kind + " (can, flows, captures)");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-tier network and bus intrusion detection pipeline"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "key=value settings file");
  app.add_option("--seed", g.seed, "override the config seed");
  app.add_option("--threads", g.threads, "worker thread count")->check(CLI::PositiveNumber);

  IngestOpts ingest;
  auto* c_ingest = app.add_subcommand("ingest", "parse raw captures into a canonical csv");
  c_ingest->add_option("--format", ingest.format, "can or flow")->default_str("flow");
  c_ingest->add_option("--input", ingest.inputs, "input files")->required()->expected(-1);
  c_ingest->add_option("--attack-name", ingest.attack_names,
                       "class for flagged frames, one per CAN input");
  c_ingest->add_flag("--can-labels", ingest.can_label_column,
                     "CAN rows end in a class name instead of an R/T flag");
  c_ingest->add_option("--out", ingest.out, "canonical csv path")->required();
  c_ingest->add_option("--report", ingest.report_csv, "machine-readable summary csv");
  c_ingest->callback([&] { run_ingest(ingest, make_config(g)); });

  SampleOpts sample;
  auto* c_sample = app.add_subcommand("sample", "cluster-stratified row subsample");
  c_sample->add_option("--input", sample.input, "canonical csv")->required();
  c_sample->add_option("--out", sample.out, "sampled csv path")->required();
  c_sample->add_option("--fraction", sample.fraction, "share kept per cluster");
  c_sample->add_option("--k", sample.k, "cluster count, 0 tunes by silhouette");
  c_sample->add_option("--k-lo", sample.k_lo, "tuning lower bound");
  c_sample->add_option("--k-hi", sample.k_hi, "tuning upper bound");
  c_sample->add_option("--budget", sample.budget, "tuning trials");
  c_sample->add_option("--distance", sample.distance, "euclidean or manhattan");
  c_sample->add_option("--report", sample.report_csv, "machine-readable summary csv");
  c_sample->callback([&] { run_sample(sample, make_config(g)); });

  TrainOpts train;
  auto* c_train = app.add_subcommand("train", "fit the full pipeline and save the model");
  c_train->add_option("--input", train.input, "canonical csv")->required();
  c_train->add_option("--model", train.model_out, "model file path");
  c_train->add_option("--holdout", train.holdout, "test share scored after training")
      ->check(CLI::Range(0.0, 0.9));
  c_train->add_option("--report", train.report_csv, "holdout metrics csv");
  c_train->add_option("--stack-trials", train.stack_trials_csv, "supervised tuning trace csv");
  c_train->add_option("--anomaly-trials", train.anomaly_trials_csv, "clustering tuning trace csv");
  c_train->callback([&] { run_train(train, make_config(g)); });

  TuneOpts tune;
  auto* c_tune = app.add_subcommand("tune", "run the hyperparameter searches and report them");
  c_tune->add_option("--input", tune.input, "canonical csv")->required();
  c_tune->add_option("--stack-trials", tune.stack_trials_csv, "supervised tuning trace csv");
  c_tune->add_option("--anomaly-trials", tune.anomaly_trials_csv, "clustering tuning trace csv");
  c_tune->callback([&] { run_tune(tune, make_config(g)); });

  DetectOpts detect;
  auto* c_detect = app.add_subcommand("detect", "stream verdicts for csv rows");
  c_detect->add_option("--model", detect.model_path, "model file")->required();
  c_detect->add_option("--input", detect.input, "feature csv, Label column optional")->required();
  c_detect->add_option("--out", detect.out, "verdict csv path, default stdout");
  c_detect->callback([&] { run_detect(detect, make_config(g)); });

  ZeroDayOpts zero;
  auto* c_zero = app.add_subcommand("zeroDay", "leave one attack class out and score it");
  c_zero->add_option("--input", zero.input, "canonical csv")->required();
  c_zero->add_option("--attack", zero.attacks, "class to hold out, repeatable; default all");
  c_zero->add_option("--report", zero.report_csv, "machine-readable results csv");
  c_zero->callback([&] { run_zero_day(zero, make_config(g)); });

  CvOpts cv;
  auto* c_cv = app.add_subcommand("cv", "stratified cross-validation of the full recipe");
  c_cv->add_option("--input", cv.input, "canonical csv")->required();
  c_cv->add_option("--folds", cv.folds, "fold count")->check(CLI::Range(2, 100));
  c_cv->add_option("--report", cv.report_csv, "per-fold metrics csv");
  c_cv->callback([&] { run_cv(cv, make_config(g)); });

  BenchOpts bench;
  auto* c_bench = app.add_subcommand("bench", "per-stage detection latency and model size");
  c_bench->add_option("--model", bench.model_path, "model file")->required();
  c_bench->add_option("--input", bench.input, "feature csv")->required();
  c_bench->add_option("--rows", bench.rows, "rows to time")->check(CLI::PositiveNumber);
  c_bench->add_option("--warmup", bench.warmup, "untimed detect calls");
  c_bench->add_option("--repeats", bench.repeats, "timed passes per row")->check(CLI::PositiveNumber);
  c_bench->add_option("--report", bench.report_csv, "per-stage csv");
  c_bench->callback([&] { run_bench(bench, make_config(g)); });

  std::string inspect_model;
  auto* c_inspect = app.add_subcommand("inspect", "describe a saved model");
  c_inspect->add_option("--model", inspect_model, "model file")->required();
  c_inspect->callback([&] {
    make_config(g);
    run_inspect(inspect_model);
  });

  SynthOpts synth;
  auto* c_synth = app.add_subcommand("synth", "generate a labeled synthetic corpus");
  c_synth->add_option("--kind", synth.kind, "can, flows or captures");
  c_synth->add_option("--out", synth.out, "output file (captures: directory)")->required();
  c_synth->callback([&] { run_synth(synth, make_config(g)); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
