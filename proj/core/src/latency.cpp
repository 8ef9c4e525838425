#include "tids/latency.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <vector>

#include "tids/errors.hpp"

namespace tids {

namespace {

using Clock = std::chrono::steady_clock;

StageStats stats_from(std::vector<double>& samples_ms) {
  StageStats s;
  if (samples_ms.empty()) return s;
  double sum = 0.0;
  for (double v : samples_ms) sum += v;
  s.mean_ms = sum / static_cast<double>(samples_ms.size());
  std::sort(samples_ms.begin(), samples_ms.end());
  const std::size_t at = static_cast<std::size_t>(
      std::min<double>(std::ceil(0.99 * static_cast<double>(samples_ms.size())),
                       static_cast<double>(samples_ms.size())) - 1.0);
  s.p99_ms = samples_ms[at];
  return s;
}

template <typename Fn>
double time_ms(const Fn& fn) {
  const auto t0 = Clock::now();
  fn();
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

BenchReport bench_latency(const PipelineModel& p, const Matrix& rows, int warmup, int repeats) {
  if (rows.rows() < 1) throw DataError("latency benchmark needs at least one row");
  repeats = std::max(repeats, 1);
  BenchReport report;
  report.rows = static_cast<std::size_t>(rows.rows());
  report.model_bytes = pipeline_bytes(p).size();

  for (int w = 0; w < warmup; ++w) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      (void)p.detect(rows.row(i).transpose());
    }
  }

  const std::size_t samples = static_cast<std::size_t>(rows.rows()) * static_cast<std::size_t>(repeats);
  std::vector<double> scaler_ms, kpca_ms, stack_ms, cluster_ms, corrector_ms, total_ms;
  scaler_ms.reserve(samples);
  kpca_ms.reserve(samples);
  stack_ms.reserve(samples);
  cluster_ms.reserve(samples);
  corrector_ms.reserve(samples);
  total_ms.reserve(samples);

  double acc = 0.0;  // flushed to a volatile below so stages stay observable
  for (int rep = 0; rep < repeats; ++rep) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      const Vector raw = rows.row(i).transpose();
      Vector sel;
      scaler_ms.push_back(time_ms([&] {
        sel = p.selection.apply_row(zscore_apply_row(p.scaler, raw));
        acc += sel.size() > 0 ? sel[0] : 0.0;
      }));
      Vector z;
      kpca_ms.push_back(time_ms([&] {
        z = kpca_transform_row(p.kpca, sel);
        acc += z.size() > 0 ? z[0] : 0.0;
      }));
      stack_ms.push_back(time_ms([&] { acc += p.stack.predict_proba(sel).sum(); }));
      cluster_ms.push_back(time_ms([&] { acc += cluster_assign(p.anomaly.clm, z).p; }));
      const EnsembleModel* guard = p.anomaly.fn_corrector.has_value()
                                       ? &*p.anomaly.fn_corrector
                                       : (p.anomaly.fp_corrector.has_value()
                                              ? &*p.anomaly.fp_corrector
                                              : nullptr);
      if (guard != nullptr) {
        corrector_ms.push_back(
            time_ms([&] { acc += corrector_attack_probability(*guard, z); }));
      }
      total_ms.push_back(time_ms([&] { acc += p.detect(raw).confidence; }));
    }
  }
  volatile double sink = acc;
  (void)sink;

  report.scaler = stats_from(scaler_ms);
  report.kpca = stats_from(kpca_ms);
  report.stack = stats_from(stack_ms);
  report.cluster = stats_from(cluster_ms);
  report.corrector = stats_from(corrector_ms);
  report.total = stats_from(total_ms);
  return report;
}

std::string BenchReport::table() const {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(4);
  const auto line = [&out](const char* name, const StageStats& s) {
    out << "  " << name << " mean " << s.mean_ms << " ms, p99 " << s.p99_ms << " ms\n";
  };
  out << "per-row stage timings over " << rows << " rows:\n";
  line("scaler+select", scaler);
  line("kernel map   ", kpca);
  line("stack        ", stack);
  line("cluster      ", cluster);
  line("corrector    ", corrector);
  line("detect total ", total);
  out << "model size: " << model_bytes << " bytes\n";
  return out.str();
}

}  // namespace tids
