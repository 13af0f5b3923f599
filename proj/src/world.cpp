#include "world.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "reward.hpp"
#include "rng.hpp"

namespace afrlab::world {

namespace {

using Pattern = std::array<CheckpointAnswer, 5>;

constexpr CheckpointAnswer Y = CheckpointAnswer::Yes;
constexpr CheckpointAnswer N = CheckpointAnswer::No;

// Checkpoint truth patterns by label. Label 1 has two variants: a weak
// match and a plain non-strong match, so the trace slots cannot be read
// off the label alone.
constexpr Pattern kPatternIrrelevant{Y, N, N, N, N};   // label 0
constexpr Pattern kPatternWeak{N, Y, N, N, N};         // label 1
constexpr Pattern kPatternNotStrong{N, N, N, N, N};    // label 1
constexpr Pattern kPatternStrong{N, N, Y, N, N};       // label 2
constexpr Pattern kPatternPremium{N, N, Y, Y, N};      // label 3
constexpr Pattern kPatternOfficial{N, N, Y, Y, Y};     // label 4

// Head traffic: overwhelmingly shortcut-predictable {1, 2} with a sliver
// of irrelevant docs. Long tail: the premium/official tier plus rare
// irrelevant cold-start docs. Head accuracy of a pure shortcut reader is
// (1 + shortcut_strength)/2 * 0.96, which clears shortcut_strength at the
// default 0.9.
constexpr double kHeadIrrelevantRate = 0.04;
constexpr double kTailIrrelevantRate = 0.2;

double side_draw(Rng& rng, bool high) {
  if (high) {
    return rng.uniform(kRuleThreshold + kRuleMargin, 1.0);
  }
  return rng.uniform(0.0, kRuleThreshold - kRuleMargin);
}

Instance gen_instance(const WorldConfig& cfg, Rng& rng) {
  Instance inst;
  inst.is_longtail = rng.bernoulli(cfg.longtail_rate);

  Pattern pat;
  if (inst.is_longtail) {
    if (rng.bernoulli(kTailIrrelevantRate)) {
      pat = kPatternIrrelevant;
    } else {
      pat = rng.bernoulli(0.5) ? kPatternPremium : kPatternOfficial;
    }
  } else {
    if (rng.bernoulli(kHeadIrrelevantRate)) {
      pat = kPatternIrrelevant;
    } else if (rng.bernoulli(0.5)) {
      pat = rng.bernoulli(0.5) ? kPatternWeak : kPatternNotStrong;
    } else {
      pat = kPatternStrong;
    }
  }
  inst.truth_checkpoints = pat;
  inst.label = reward::infer_label(pat);

  auto& f = inst.features;
  f.assign(static_cast<size_t>(cfg.feature_dim), 0.0);
  f[kFeatEvidence] = side_draw(rng, pat[0] != Y);  // low evidence -> irrelevant
  f[kFeatWeakness] = side_draw(rng, pat[1] == Y);
  f[kFeatStrength] = side_draw(rng, pat[2] == Y);
  f[kFeatPremium] = side_draw(rng, pat[3] == Y);
  // Off the long tail the official rule is dead (indicator 0), so the
  // coordinate is left unconstrained as a distractor.
  f[kFeatOfficial] =
      inst.is_longtail ? side_draw(rng, pat[4] == Y) : rng.uniform();
  f[kFeatLongtail] = inst.is_longtail ? 1.0 : 0.0;

  const bool majority = inst.label >= 2;
  const bool shortcut_bit =
      rng.bernoulli(cfg.shortcut_strength) ? majority : rng.bernoulli(0.5);
  f[kFeatShortcut] = side_draw(rng, shortcut_bit);

  for (int d = kMinFeatureDim; d < cfg.feature_dim; ++d) {
    f[d] = rng.uniform();
  }
  return inst;
}

CheckpointAnswer answer_from_string(const std::string& s) {
  if (s == "Yes") return CheckpointAnswer::Yes;
  if (s == "No") return CheckpointAnswer::No;
  if (s == "None") return CheckpointAnswer::None;
  throw std::invalid_argument("bad checkpoint string: " + s);
}

}  // namespace

bool WorldConfig::valid() const {
  if (feature_dim < kMinFeatureDim) return false;
  if (longtail_rate < 0.0 || longtail_rate > 1.0) return false;
  if (shortcut_strength < 0.0 || shortcut_strength > 1.0) return false;
  return true;
}

std::array<CheckpointAnswer, 5> oracle_checkpoints(
    std::span<const double> f) {
  if (f.size() < kMinFeatureDim) {
    throw std::invalid_argument("oracle_checkpoints: feature dim < 7");
  }
  const auto as_answer = [](bool fired) { return fired ? Y : N; };
  std::array<CheckpointAnswer, 5> c;
  c[0] = as_answer(f[kFeatEvidence] < kRuleThreshold);
  c[1] = as_answer(f[kFeatWeakness] >= kRuleThreshold);
  c[2] = as_answer(f[kFeatStrength] >= kRuleThreshold);
  c[3] = as_answer(f[kFeatPremium] >= kRuleThreshold);
  c[4] = as_answer(f[kFeatOfficial] >= kRuleThreshold &&
                   f[kFeatLongtail] >= kRuleThreshold);
  return c;
}

Dataset gen_dataset(size_t n, const WorldConfig& cfg) {
  if (n < 1) throw std::invalid_argument("gen_dataset: n must be >= 1");
  if (!cfg.valid()) throw std::invalid_argument("gen_dataset: invalid config");
  Dataset ds;
  ds.config = cfg;
  ds.instances.reserve(n);
  const Rng root(cfg.seed);
  for (size_t i = 0; i < n; ++i) {
    Rng sub = root.substream(i);
    ds.instances.push_back(gen_instance(cfg, sub));
  }
  return ds;
}

Trajectory expert_trajectory(const Instance& inst) {
  Trajectory t;
  t.y_dec = inst.label;
  t.checkpoints = inst.truth_checkpoints;
  t.y_final = inst.label;
  return t;
}

void write_jsonl(const Dataset& ds, std::ostream& out) {
  for (const Instance& inst : ds.instances) {
    nlohmann::json j;
    j["features"] = inst.features;
    auto names = nlohmann::json::array();
    for (CheckpointAnswer a : inst.truth_checkpoints) {
      names.push_back(grammar::to_string(a));
    }
    j["checkpoints"] = names;
    j["label"] = inst.label;
    j["is_longtail"] = inst.is_longtail;
    out << j.dump() << '\n';
  }
}

Dataset read_jsonl(std::istream& in) {
  Dataset ds;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    Instance inst;
    inst.features = j.at("features").get<std::vector<double>>();
    const auto names = j.at("checkpoints").get<std::vector<std::string>>();
    if (names.size() != 5) {
      throw std::invalid_argument("instance needs exactly 5 checkpoints");
    }
    for (size_t i = 0; i < 5; ++i) {
      inst.truth_checkpoints[i] = answer_from_string(names[i]);
    }
    inst.label = j.at("label").get<int>();
    inst.is_longtail = j.at("is_longtail").get<bool>();
    ds.instances.push_back(std::move(inst));
  }
  if (!ds.instances.empty()) {
    ds.config.feature_dim =
        static_cast<int>(ds.instances.front().features.size());
  }
  return ds;
}

}  // namespace afrlab::world
