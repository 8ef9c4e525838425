#include "tids/smote.hpp"

#include <algorithm>
#include <limits>

#include "tids/errors.hpp"
#include "tids/rng.hpp"

namespace tids {

std::vector<std::size_t> smote_targets(const std::vector<std::size_t>& class_sizes,
                                       std::size_t target_count) {
  std::vector<std::size_t> out = class_sizes;
  for (auto& v : out)
    if (v < target_count) v = target_count;
  return out;
}

LabeledDataset smote(const LabeledDataset& d, const SmoteConfig& cfg,
                     std::vector<std::string>* warnings) {
  if (cfg.k_neighbors < 1) throw ConfigError("smote k_neighbors must be positive");
  auto sizes = d.class_counts();
  auto targets = smote_targets(sizes, cfg.target_count);

  std::size_t extra_total = 0;
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    if (targets[c] <= sizes[c]) continue;
    if (sizes[c] == 1)
      throw DataError("class '" + d.class_names[c] +
                      "' has a single row, cannot synthesize neighbors");
    extra_total += targets[c] - sizes[c];
  }

  LabeledDataset out = d;
  out.timestamps.clear();  // synthetic rows have no replay time
  if (extra_total == 0) return out;

  const auto f = d.features.cols();
  out.features.conservativeResize(d.features.rows() + static_cast<Eigen::Index>(extra_total), f);
  out.labels.reserve(out.labels.size() + extra_total);
  Rng rng(mix_seed(cfg.seed, 0x510e));
  Eigen::Index write = d.features.rows();

  std::vector<std::vector<std::size_t>> members(sizes.size());
  for (std::size_t i = 0; i < d.labels.size(); ++i)
    members[static_cast<std::size_t>(d.labels[i])].push_back(i);

  for (std::size_t c = 0; c < sizes.size(); ++c) {
    if (targets[c] <= sizes[c]) continue;
    const auto& rows = members[c];
    int k = cfg.k_neighbors;
    if (static_cast<std::size_t>(k) + 1 > rows.size()) {
      k = static_cast<int>(rows.size()) - 1;
      if (warnings)
        warnings->push_back("class '" + d.class_names[c] + "' has " +
                            std::to_string(rows.size()) + " rows, k reduced to " +
                            std::to_string(k));
    }

    // k nearest same-class neighbors per class row, squared euclidean
    const std::size_t m = rows.size();
    std::vector<std::vector<std::size_t>> neighbors(m);
    for (std::size_t a = 0; a < m; ++a) {
      std::vector<std::pair<double, std::size_t>> dist;
      dist.reserve(m - 1);
      for (std::size_t b = 0; b < m; ++b) {
        if (a == b) continue;
        double sq = (d.features.row(static_cast<Eigen::Index>(rows[a])) -
                     d.features.row(static_cast<Eigen::Index>(rows[b])))
                        .squaredNorm();
        dist.emplace_back(sq, b);
      }
      std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
      neighbors[a].reserve(static_cast<std::size_t>(k));
      for (int t = 0; t < k; ++t) neighbors[a].push_back(dist[static_cast<std::size_t>(t)].second);
    }

    std::size_t need = targets[c] - sizes[c];
    for (std::size_t s = 0; s < need; ++s) {
      std::size_t a = s % m;  // cycle through originals
      std::size_t b = neighbors[a][rng.below(static_cast<std::uint64_t>(k))];
      double r = rng.uniform();
      out.features.row(write) =
          d.features.row(static_cast<Eigen::Index>(rows[a])) +
          r * (d.features.row(static_cast<Eigen::Index>(rows[b])) -
               d.features.row(static_cast<Eigen::Index>(rows[a])));
      out.labels.push_back(static_cast<int>(c));
      ++write;
    }
  }
  return out;
}

}  // namespace tids
