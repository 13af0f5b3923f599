#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "grammar.hpp"

namespace afrlab::reward {

using grammar::CheckpointAnswer;
using grammar::Trajectory;

struct RewardConfig {
  double alpha = 0.72;           // result weight
  double beta = 0.28;            // CoT weight
  double gamma_ord = 0.25;       // ordinal distance penalty
  double format_penalty = -1.0;  // returned whenever the format gate fails
  double w_decision = 10.0;
  double w_trace = 10.0;
  double w_final = 5.0;

  bool valid() const;
};

/// Gates, component rewards and total for one trajectory text.
struct RewardBreakdown {
  int i_fmt = 0;
  int i_cst = 0;
  int i_logic = 0;
  std::optional<int> y_hat;  // absent when the text did not parse
  double r_res = 0.0;
  double r_cot = 0.0;
  double total = 0.0;

  /// One JSONL audit record, fields exactly as above.
  std::string to_jsonl() const;
};

/// Per-slot advantage weights: (decision, 5x trace, final).
struct WeightMask {
  std::array<double, grammar::kNumSlots> weights{};
};

/// 1 iff y_dec equals y_final.
int consistency_gate(const Trajectory& t);

/// Deterministic decision tree over the steps 4-8 answers
/// (irrelevant, weak, strong, premium, official) -> expected label.
int infer_label(const std::array<CheckpointAnswer, 5>& checkpoints);

/// Logic circuit breaker: passes iff inferred == predicted == ground truth.
/// Returns (gate, inferred label).
std::pair<int, int> logic_gate(const Trajectory& t, int y_gt);

/// 1.0 on exact match, else -gamma_ord * |y_pred - y_gt|.
double ordinal_result_reward(int y_pred, int y_gt, const RewardConfig& cfg);

/// Full gated reward over raw text. Parse failure folds into the format
/// gate and yields cfg.format_penalty; otherwise
/// total = i_cst * i_logic * (alpha * r_res + beta * r_cot).
RewardBreakdown total_reward(std::string_view text, int y_gt,
                             const RewardConfig& cfg);

WeightMask weight_mask(const RewardConfig& cfg);

}  // namespace afrlab::reward
