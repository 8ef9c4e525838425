#ifndef TIDS_PIPELINE_HPP
#define TIDS_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tids/anomaly.hpp"
#include "tids/config.hpp"
#include "tids/dataset.hpp"
#include "tids/kpca.hpp"
#include "tids/scaler.hpp"
#include "tids/selection.hpp"
#include "tids/stack.hpp"

namespace tids {

enum class VerdictKind { Normal, Known, UnknownAttack };

const char* verdict_kind_name(VerdictKind k);

struct Verdict {
  VerdictKind kind = VerdictKind::Normal;
  int class_index = -1;  // registry index for Known and Normal, -1 for UnknownAttack
  double confidence = 0.0;
  std::vector<int> tier_trace;  // {1}, {1,3} or {1,3,4}
};

bool verdict_is_attack(const Verdict& v);

struct DetectStats {
  std::size_t node_visits = 0;
  std::size_t distance_evals = 0;
  std::size_t tiers_fired = 0;
};

struct PipelineModel {
  static constexpr std::uint32_t format_version = 1;

  ZScoreScaler scaler;
  FeatureSelection selection;
  KpcaModel kpca;
  StackedModel stack;
  AnomalyModel anomaly;
  std::vector<std::string> class_names;
  std::vector<std::uint8_t> attack_class;
  int normal_class = 0;
  std::vector<std::string> feature_names;  // raw input layout

  Verdict detect(const Vector& raw_row, DetectStats* stats = nullptr) const;
  std::vector<Verdict> detect_batch(const Matrix& rows) const;
};

struct TrainDiagnostics {
  StackDiagnostics stack;
  AnomalyDiagnostics anomaly;
  std::vector<std::string> warnings;
  std::vector<std::string> selected_features;
  std::size_t smote_added = 0;
  double train_seconds = 0.0;
};

// full training recipe: optional class balancing, standardization, importance +
// redundancy feature selection, the supervised stack, then the kernel-space
// clustering tier with its correctors. cfg keys use section prefixes
// (smote., features., kpca., stack., anomaly.).
PipelineModel train_pipeline(const LabeledDataset& train, const Config& cfg,
                             TrainDiagnostics* diag = nullptr);

// the serialized container as bytes; save_pipeline writes exactly this
std::string pipeline_bytes(const PipelineModel& p);

void save_pipeline(const PipelineModel& p, const std::string& path);
PipelineModel load_pipeline(const std::string& path);

}  // namespace tids

#endif
