#ifndef TIDS_TPE_HPP
#define TIDS_TPE_HPP

#include "tids/search_space.hpp"

namespace tids {

struct TpeOptions {
  double gamma = 0.25;    // quantile that separates good from bad trials
  int n_candidates = 24;  // draws from the good-side density per round
  int init = 5;           // quasi-random start-up trials
};

// one proposal round, exposed so the candidate scoring can be inspected:
// candidates are drawn from the good-side density and scored by
// log l(x) - log g(x); chosen is the argmax
struct TpeProposal {
  std::vector<Assignment> candidates;
  std::vector<double> score;
  std::size_t chosen = 0;
};

TpeProposal tpe_propose(const std::vector<Trial>& history, const SearchSpace& space,
                        const TpeOptions& opts, Rng& rng);

// density-ratio guided minimization; handles conditional parameters by
// building per-parameter densities from trials where the parameter was active
OptResult bo_tpe_optimize(const Objective& objective, const SearchSpace& space, int budget,
                          std::uint64_t seed, const TpeOptions& opts = {});

}  // namespace tids

#endif
