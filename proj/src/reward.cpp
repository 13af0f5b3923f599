#include "reward.hpp"

#include <cmath>
#include <cstdlib>

#include "json.hpp"

namespace afrlab::reward {

bool RewardConfig::valid() const {
  if (std::abs(alpha + beta - 1.0) > 1e-12) return false;
  if (gamma_ord < 0.0) return false;
  return w_decision > 0.0 && w_trace > 0.0 && w_final > 0.0;
}

std::string RewardBreakdown::to_jsonl() const {
  nlohmann::json j;
  j["i_fmt"] = i_fmt;
  j["i_cst"] = i_cst;
  j["i_logic"] = i_logic;
  if (y_hat) {
    j["y_hat"] = *y_hat;
  } else {
    j["y_hat"] = nullptr;
  }
  j["r_res"] = r_res;
  j["r_cot"] = r_cot;
  j["total"] = total;
  return j.dump();
}

int consistency_gate(const Trajectory& t) {
  return t.y_dec == t.y_final ? 1 : 0;
}

int infer_label(const std::array<CheckpointAnswer, 5>& c) {
  const auto yes = [&](int i) { return c[i] == CheckpointAnswer::Yes; };
  if (yes(0)) return 0;   // irrelevant
  if (yes(1)) return 1;   // weak
  if (!yes(2)) return 1;  // not even a strong match
  if (!yes(3)) return 2;  // strong but not premium
  if (!yes(4)) return 3;  // premium but not official
  return 4;
}

std::pair<int, int> logic_gate(const Trajectory& t, int y_gt) {
  const int y_hat = infer_label(t.checkpoints);
  const int gate = (y_hat == t.y_dec && y_hat == y_gt) ? 1 : 0;
  return {gate, y_hat};
}

double ordinal_result_reward(int y_pred, int y_gt, const RewardConfig& cfg) {
  if (y_pred == y_gt) return 1.0;
  return -cfg.gamma_ord * std::abs(y_pred - y_gt);
}

RewardBreakdown total_reward(std::string_view text, int y_gt,
                             const RewardConfig& cfg) {
  RewardBreakdown out;
  const auto parsed = grammar::parse_trajectory(text);
  if (!std::holds_alternative<Trajectory>(parsed)) {
    out.total = cfg.format_penalty;
    return out;
  }
  const Trajectory& t = std::get<Trajectory>(parsed);
  out.i_fmt = 1;
  out.i_cst = consistency_gate(t);
  const auto [gate, y_hat] = logic_gate(t, y_gt);
  out.i_logic = gate;
  out.y_hat = y_hat;
  out.r_res = ordinal_result_reward(t.y_dec, y_gt, cfg);
  out.r_cot = static_cast<double>(out.i_logic);
  out.total = out.i_cst * out.i_logic *
              (cfg.alpha * out.r_res + cfg.beta * out.r_cot);
  return out;
}

WeightMask weight_mask(const RewardConfig& cfg) {
  WeightMask m;
  m.weights[0] = cfg.w_decision;
  for (int i = 1; i <= 5; ++i) m.weights[i] = cfg.w_trace;
  m.weights[6] = cfg.w_final;
  return m;
}

}  // namespace afrlab::reward
