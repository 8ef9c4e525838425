#ifndef TIDS_PROTOCOL_HPP
#define TIDS_PROTOCOL_HPP

#include <string>
#include <vector>

#include "tids/config.hpp"
#include "tids/dataset.hpp"
#include "tids/metrics.hpp"
#include "tids/pipeline.hpp"

namespace tids {

struct CvReport {
  MetricsReport mean;  // rates averaged over folds, counts summed
  std::vector<MetricsReport> folds;
  std::vector<std::string> warnings;
  int folds_used = 0;
};

// stratified folds; the full training recipe runs on each fold-train only.
// multi-class scores come from the supervised stack, the binary rates from
// complete verdict routing
CvReport cross_validate(const LabeledDataset& train, const Config& cfg, int folds);

struct ZeroDayReport {
  MetricsReport full;      // complete routing
  MetricsReport ablation;  // cluster labels alone, no stack and no correctors
  std::string held_out;
  std::size_t validation_rows = 0;
  std::vector<std::string> warnings;
};

// every row of one attack class is held out of all training stages; the
// validation set is those rows plus an equal count of normal rows that
// training never sees. positives are UnknownAttack or any Known verdict.
ZeroDayReport zero_day_eval(const LabeledDataset& d, const std::string& attack_class,
                            const Config& cfg);

}  // namespace tids

#endif
