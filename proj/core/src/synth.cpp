#include "tids/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "tids/csv.hpp"
#include "tids/errors.hpp"
#include "tids/rng.hpp"

namespace tids {

namespace {

// ---- bus frames ----------------------------------------------------------

constexpr std::array<int, 10> kLegitIds = {0x130, 0x131, 0x140, 0x153, 0x220,
                                           0x2a0, 0x316, 0x329, 0x43f, 0x4b1};
constexpr int kGearId = 0x43f;
constexpr int kRpmId = 0x316;

struct Frame {
  int id = 0;
  int dlc = 8;
  std::array<int, 8> data{};
};

// structured payload: constant tag bytes derived from the id, a 4-bit rolling
// alive counter, a bounded sensor byte and a checksum-style byte tying them
// together
Frame normal_frame(int id, int counter, Rng& rng) {
  Frame f;
  f.id = id;
  f.data[0] = 0x05;
  f.data[1] = counter & 0x0f;
  f.data[2] = id & 0xff;
  f.data[3] = 0x28 + static_cast<int>(rng.range(0, 0x32));
  f.data[4] = 0x00;
  f.data[5] = (f.data[1] + f.data[3]) & 0xff;
  f.data[6] = 0x00;
  f.data[7] = (id >> 4) & 0xff;
  return f;
}

Frame dos_frame() {
  Frame f;
  f.id = 0x000;
  f.data.fill(0x00);
  return f;
}

Frame fuzzy_frame(Rng& rng, double overlap, int counter) {
  Frame f;
  if (rng.uniform() < overlap) {
    // keeps a legitimate id, a plausible counter and most of the payload
    // shape, randomizing the sensor and check bytes; the hard-to-spot portion
    const int id = kLegitIds[rng.below(kLegitIds.size())];
    f = normal_frame(id, counter, rng);
    f.data[1] = static_cast<int>(rng.below(16));
    f.data[3] = static_cast<int>(rng.range(0, 255));
    f.data[5] = static_cast<int>(rng.range(0, 255));
  } else {
    f.id = static_cast<int>(rng.range(0, 0x7ff));
    for (int b = 0; b < 8; ++b) f.data[static_cast<std::size_t>(b)] =
        static_cast<int>(rng.range(0, 255));
  }
  return f;
}

Frame gear_frame() {
  Frame f;
  f.id = kGearId;
  f.data[0] = 0x05;
  f.data[1] = 0xaa;
  f.data[2] = kGearId & 0xff;
  f.data[3] = 0xff;
  f.data[4] = 0x00;
  f.data[5] = 0x55;
  f.data[6] = 0x00;
  f.data[7] = (kGearId >> 4) & 0xff;
  return f;
}

Frame rpm_frame(int counter, Rng& rng) {
  Frame f;
  f.id = kRpmId;
  f.data[0] = 0x05;
  f.data[1] = counter & 0x0f;
  f.data[2] = kRpmId & 0xff;
  f.data[3] = 0xf0 + static_cast<int>(rng.range(0, 0x0f));
  f.data[4] = 0x00;
  f.data[5] = 0x00;  // checksum byte deliberately broken by the spoofer
  f.data[6] = 0x00;
  f.data[7] = (kRpmId >> 4) & 0xff;
  return f;
}

std::vector<std::string> can_feature_names() {
  std::vector<std::string> names = {"CAN ID", "DLC"};
  for (int b = 0; b < 8; ++b) names.push_back("DATA[" + std::to_string(b) + "]");
  return names;
}

void frame_into(Matrix& x, Eigen::Index row, const Frame& f) {
  x(row, 0) = static_cast<double>(f.id);
  x(row, 1) = static_cast<double>(f.dlc);
  for (int b = 0; b < 8; ++b) x(row, 2 + b) = static_cast<double>(f.data[static_cast<std::size_t>(b)]);
}

struct FrameBatch {
  std::vector<Frame> frames;
  std::vector<int> labels;
};

FrameBatch make_can_frames(const CanSynthConfig& cfg) {
  FrameBatch batch;
  Rng rng(mix_seed(cfg.seed, 0xca9));
  const std::size_t total = cfg.normal + cfg.dos + cfg.fuzzy + cfg.gear + cfg.rpm;
  batch.frames.reserve(total);
  batch.labels.reserve(total);
  int counter = 0;
  for (std::size_t i = 0; i < cfg.normal; ++i) {
    const int id = kLegitIds[rng.below(kLegitIds.size())];
    batch.frames.push_back(normal_frame(id, ++counter, rng));
    batch.labels.push_back(0);
  }
  for (std::size_t i = 0; i < cfg.dos; ++i) {
    batch.frames.push_back(dos_frame());
    batch.labels.push_back(1);
  }
  for (std::size_t i = 0; i < cfg.fuzzy; ++i) {
    batch.frames.push_back(fuzzy_frame(rng, cfg.fuzzy_overlap, ++counter));
    batch.labels.push_back(2);
  }
  for (std::size_t i = 0; i < cfg.gear; ++i) {
    batch.frames.push_back(gear_frame());
    batch.labels.push_back(3);
  }
  for (std::size_t i = 0; i < cfg.rpm; ++i) {
    batch.frames.push_back(rpm_frame(++counter, rng));
    batch.labels.push_back(4);
  }
  // interleave classes the way a live capture would
  std::vector<std::size_t> order(batch.frames.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  FrameBatch mixed;
  mixed.frames.reserve(total);
  mixed.labels.reserve(total);
  for (std::size_t i : order) {
    mixed.frames.push_back(batch.frames[i]);
    mixed.labels.push_back(batch.labels[i]);
  }
  return mixed;
}

// ---- flow records ---------------------------------------------------------

constexpr int kInformative = 8;
constexpr int kRedundant = 6;
constexpr int kNoise = 26;
constexpr int kFlowFeatures = kInformative + kRedundant + kNoise;

struct Blob {
  std::array<double, 8> center;
  double sd;
};

struct FlowClassSpec {
  std::string name;
  std::vector<Blob> blobs;          // sampled uniformly
  std::vector<Blob> near_blobs;     // sampled with probability near_fraction
};

std::vector<FlowClassSpec> flow_classes(const FlowSynthConfig& cfg) {
  const double a = cfg.near_shift_a;
  const double b = cfg.near_shift_b;
  const auto near_twin = [&](const Blob& parent) {
    Blob t = parent;
    t.center[6] += a;
    t.center[7] += b;
    t.sd = 0.45;
    return t;
  };
  const Blob benign1{{0, 0, 0, 0, 0, 0, 0, 0}, 0.7};
  const Blob benign2{{2, 1, 0, 1, 0, 0, 1, 0}, 0.7};
  const Blob benign3{{-2, 0, 1, 0, 1, 0, 0, 1}, 0.7};
  const Blob benign4{{0, -2, -1, 0, 0, 1, 0, 0}, 0.7};

  std::vector<FlowClassSpec> classes;
  classes.push_back({"BENIGN", {benign1, benign2, benign3, benign4}, {}});
  classes.push_back({"Flood", {{{5, 4, 0, 1, 0, 0, 0, 0}, 0.55}}, {near_twin(benign1)}});
  classes.push_back({"PortSweep", {{{-5, 3, 2, 0, 1, 0, 0, 0}, 0.55}}, {near_twin(benign2)}});
  classes.push_back({"BruteForce", {{{4, -4, 1, 0, 0, 1, 0, 0}, 0.55}}, {}});
  classes.push_back({"WebAttack", {{{-4, -4, 0, 1, 0, 0, 0, 0}, 0.55}}, {near_twin(benign3)}});
  classes.push_back({"Botnet", {{{3, 3, 3, 0, 0, 0, 0, 0}, 0.55}}, {}});
  classes.push_back({"Infiltration", {near_twin(benign4)}, {}});  // lives beside benign only
  classes.push_back({"Heartbleed", {{{7, -7, 6, 0, 0, 0, 0, 0}, 0.25}}, {}});
  return classes;
}

std::vector<std::string> flow_feature_names() {
  std::vector<std::string> names = {"flow_duration",  "fwd_packets",  "bwd_packets",
                                    "fwd_len_mean",   "bwd_len_mean", "pkt_len_var",
                                    "active_mean",    "idle_mean",    "fwd_len_total",
                                    "bwd_len_total",  "pkt_len_mean", "subflow_fwd",
                                    "subflow_bwd",    "header_len"};
  for (int i = 0; i < kNoise; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "noise_%02d", i);
    names.push_back(buf);
  }
  return names;
}

void flow_row(Matrix& x, Eigen::Index row, const Blob& blob, Rng& rng) {
  std::array<double, 8> f{};
  for (int i = 0; i < kInformative; ++i) {
    f[static_cast<std::size_t>(i)] =
        blob.center[static_cast<std::size_t>(i)] + blob.sd * rng.gaussian();
    x(row, i) = f[static_cast<std::size_t>(i)];
  }
  const auto eps = [&rng] { return 0.02 * rng.gaussian(); };
  x(row, 8) = 2.0 * f[0] + 0.5 + eps();
  x(row, 9) = -1.5 * f[1] + eps();
  x(row, 10) = 0.5 * f[2] - 1.0 + eps();
  x(row, 11) = 3.0 * f[3] + eps();
  x(row, 12) = -f[4] + 2.0 + eps();
  x(row, 13) = 1.2 * f[5] + eps();
  for (int i = kInformative + kRedundant; i < kFlowFeatures; ++i) {
    x(row, i) = rng.gaussian();
  }
}

}  // namespace

LabeledDataset synth_can(const CanSynthConfig& cfg) {
  const FrameBatch batch = make_can_frames(cfg);
  if (batch.frames.empty()) throw ConfigError("bus generator asked for zero frames");
  LabeledDataset d;
  d.feature_names = can_feature_names();
  d.class_names = {"Normal", "DoS", "Fuzzy", "Gear", "RPM"};
  d.features.resize(static_cast<Eigen::Index>(batch.frames.size()), 10);
  d.labels = batch.labels;
  d.timestamps.reserve(batch.frames.size());
  double ts = 0.0;
  for (std::size_t i = 0; i < batch.frames.size(); ++i) {
    frame_into(d.features, static_cast<Eigen::Index>(i), batch.frames[i]);
    ts += 0.0005;
    d.timestamps.push_back(ts);
  }
  mark_attack_classes(d);
  return d;
}

std::vector<CanCapture> synth_can_captures(const CanSynthConfig& cfg) {
  const char* attack_names[] = {"", "DoS", "Fuzzy", "Gear", "RPM"};
  std::vector<CanCapture> captures;
  const FrameBatch batch = make_can_frames(cfg);
  // one capture per attack: its frames plus a slice of the normal background
  for (int attack = 1; attack <= 4; ++attack) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(6);
    double ts = 0.0;
    std::size_t normal_turn = 0;
    for (std::size_t i = 0; i < batch.frames.size(); ++i) {
      const bool is_attack = batch.labels[i] == attack;
      const bool is_background = batch.labels[i] == 0 && (normal_turn++ % 4) == static_cast<std::size_t>(attack - 1);
      if (!is_attack && !is_background) continue;
      const Frame& f = batch.frames[i];
      ts += 0.0005;
      out << ts << ',';
      char idbuf[8];
      std::snprintf(idbuf, sizeof idbuf, "%04x", static_cast<unsigned>(f.id));
      out << idbuf << ',' << f.dlc;
      for (int b = 0; b < f.dlc; ++b) {
        char byte[8];
        std::snprintf(byte, sizeof byte, "%02x", static_cast<unsigned>(f.data[static_cast<std::size_t>(b)]));
        out << ',' << byte;
      }
      out << ',' << (is_attack ? 'T' : 'R') << '\n';
    }
    CanCapture cap;
    cap.name = std::string("capture_") + attack_names[attack];
    cap.attack_name = attack_names[attack];
    cap.csv = out.str();
    captures.push_back(std::move(cap));
  }
  return captures;
}

LabeledDataset synth_flows(const FlowSynthConfig& cfg) {
  const std::vector<FlowClassSpec> classes = flow_classes(cfg);
  const std::array<std::size_t, 8> counts = {cfg.benign,    cfg.flood,        cfg.sweep,
                                             cfg.bruteforce, cfg.webattack,   cfg.botnet,
                                             cfg.infiltration, cfg.heartbleed};
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  if (total == 0) throw ConfigError("flow generator asked for zero rows");

  LabeledDataset d;
  d.feature_names = flow_feature_names();
  d.features.resize(static_cast<Eigen::Index>(total), kFlowFeatures);
  d.labels.reserve(total);
  for (const FlowClassSpec& spec : classes) d.class_names.push_back(spec.name);

  Rng rng(mix_seed(cfg.seed, 0xf10));
  std::vector<std::size_t> order(total);
  for (std::size_t i = 0; i < total; ++i) order[i] = i;
  rng.shuffle(order);

  std::size_t cursor = 0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const FlowClassSpec& spec = classes[c];
    for (std::size_t i = 0; i < counts[c]; ++i) {
      const bool near = !spec.near_blobs.empty() && rng.uniform() < cfg.near_fraction;
      const std::vector<Blob>& pool = near ? spec.near_blobs : spec.blobs;
      const Blob& blob = pool[pool.size() == 1 ? 0 : rng.below(pool.size())];
      flow_row(d.features, static_cast<Eigen::Index>(order[cursor++]), blob, rng);
    }
  }
  d.labels.assign(total, 0);
  cursor = 0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    for (std::size_t i = 0; i < counts[c]; ++i) {
      d.labels[order[cursor++]] = static_cast<int>(c);
    }
  }
  mark_attack_classes(d);
  return d;
}

std::string synth_flow_csv(const FlowSynthConfig& cfg) {
  LabeledDataset d = synth_flows(cfg);
  Rng rng(mix_seed(cfg.seed, 0xd127));
  const double bad = std::numeric_limits<double>::infinity();
  for (Eigen::Index r = 0; r < d.features.rows(); ++r) {
    // only noise columns get dirtied, so median repair stays harmless
    for (int c = kInformative + kRedundant; c < kFlowFeatures; ++c) {
      if (rng.uniform() < cfg.dirty_fraction) {
        const double roll = rng.uniform();
        d.features(r, c) = roll < 0.4 ? bad : (roll < 0.7 ? -bad : std::nan(""));
      }
    }
  }
  return canonical_csv_string(d);
}

}  // namespace tids
