#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "grammar.hpp"

namespace afrlab::world {

using grammar::CheckpointAnswer;
using grammar::Trajectory;

// Feature layout. Coordinates 0-4 back the five checkpoint rules, 5 is the
// long-tail indicator, 6 the shortcut, and anything beyond is noise.
inline constexpr int kFeatEvidence = 0;   // low -> irrelevant
inline constexpr int kFeatWeakness = 1;   // high -> weak match
inline constexpr int kFeatStrength = 2;   // high -> strong match
inline constexpr int kFeatPremium = 3;    // high -> premium quality
inline constexpr int kFeatOfficial = 4;   // high (and long-tail) -> official
inline constexpr int kFeatLongtail = 5;   // 1.0 on long-tail instances
inline constexpr int kFeatShortcut = 6;   // noisy copy of (label >= 2)
inline constexpr int kMinFeatureDim = 7;

inline constexpr double kRuleThreshold = 0.5;
// Generated coordinates stay this far from the rule threshold, keeping the
// task realizable by a linear policy.
inline constexpr double kRuleMargin = 0.05;

struct WorldConfig {
  int feature_dim = 16;
  double longtail_rate = 0.02;
  double shortcut_strength = 0.9;  // Pearson correlation of the shortcut
  uint64_t seed = 0;

  bool valid() const;
};

struct Instance {
  std::vector<double> features;
  std::array<CheckpointAnswer, 5> truth_checkpoints{};
  int label = 0;
  bool is_longtail = false;
};

struct Dataset {
  std::vector<Instance> instances;
  WorldConfig config;
};

/// Deterministic rule oracle: thresholds on the designated coordinates;
/// the official rule additionally requires the long-tail indicator.
std::array<CheckpointAnswer, 5> oracle_checkpoints(
    std::span<const double> features);

/// n instances, reproducible byte-for-byte from (n, cfg): instance i is
/// drawn from the substream keyed by i, independent of generation order.
Dataset gen_dataset(size_t n, const WorldConfig& cfg);

/// The expert output for an instance: y_dec = y_final = label, checkpoints
/// equal to the oracle truths. Earns the maximum reward 1.0 by construction.
Trajectory expert_trajectory(const Instance& inst);

// JSONL: one instance per line with fields
// {"features": [...], "checkpoints": [...], "label": k, "is_longtail": b}.
void write_jsonl(const Dataset& ds, std::ostream& out);
Dataset read_jsonl(std::istream& in);

}  // namespace afrlab::world
