#ifndef TIDS_SYNTH_HPP
#define TIDS_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tids/dataset.hpp"

namespace tids {

// in-vehicle bus frames: legitimate ids with structured payloads, a flooder
// pinned to the highest-priority id, random-frame fuzzing (a tunable share of
// it re-using legitimate ids), and two fixed-id spoofing patterns
struct CanSynthConfig {
  std::size_t normal = 40000;
  std::size_t dos = 8000;
  std::size_t fuzzy = 8000;
  std::size_t gear = 6000;
  std::size_t rpm = 6000;
  // share of fuzzing frames that keep a legitimate id and plausible payload
  // shape; raises the anomaly tier's miss rate on this class
  double fuzzy_overlap = 0.35;
  std::uint64_t seed = 7;
};

LabeledDataset synth_can(const CanSynthConfig& cfg);

// raw capture files as the bus logger would emit them: timestamp, hex id,
// dlc, payload bytes, R/T flag; one capture per attack type
struct CanCapture {
  std::string name;
  std::string attack_name;
  std::string csv;
};
std::vector<CanCapture> synth_can_captures(const CanSynthConfig& cfg);

// network flow records: gaussian blob mixture over a handful of informative
// columns, near-deterministic linear copies of some of them (redundancy for
// the correlation filter), and noise columns. several attack classes carry a
// "near-benign" twin blob shifted in two shared columns, which the clustering
// tier tends to merge into benign clusters — the errors that the corrector
// classifiers exist to fix.
struct FlowSynthConfig {
  std::size_t benign = 12000;
  std::size_t flood = 2500;        // volumetric attack
  std::size_t sweep = 2000;        // scanning attack
  std::size_t bruteforce = 900;
  std::size_t webattack = 700;
  std::size_t botnet = 600;
  std::size_t infiltration = 60;
  std::size_t heartbleed = 30;
  double near_fraction = 0.35;  // share of flood/sweep/webattack rows from the twin blob
  double near_shift_a = 2.2;    // twin displacement in the two shared columns
  double near_shift_b = 1.8;
  double dirty_fraction = 0.0015;  // csv cells replaced by Infinity/NaN tokens
  std::uint64_t seed = 11;
};

LabeledDataset synth_flows(const FlowSynthConfig& cfg);

// csv text with a header and occasional non-finite tokens, for the ingest path
std::string synth_flow_csv(const FlowSynthConfig& cfg);

}  // namespace tids

#endif
