#ifndef TIDS_LATENCY_HPP
#define TIDS_LATENCY_HPP

#include <cstddef>
#include <string>

#include "tids/dataset.hpp"
#include "tids/pipeline.hpp"

namespace tids {

struct StageStats {
  double mean_ms = 0.0;
  double p99_ms = 0.0;
};

struct BenchReport {
  StageStats scaler;     // standardization + column selection
  StageStats kpca;       // kernel projection
  StageStats stack;      // supervised tier
  StageStats cluster;    // centroid assignment
  StageStats corrector;  // guard classifiers, when present
  StageStats total;      // one full detect call
  std::size_t rows = 0;
  std::size_t model_bytes = 0;

  std::string table() const;
};

// times every stage per row (each stage forced, independent of routing) plus
// the real detect path; gating thresholds live with the caller
BenchReport bench_latency(const PipelineModel& p, const Matrix& rows, int warmup, int repeats);

}  // namespace tids

#endif
