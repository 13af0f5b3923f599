#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "policy.hpp"

namespace afrlab::optim {

using policy::PolicyGrad;
using policy::PolicyParams;

/// Thrown when a loss or gradient goes non-finite; the runner aborts the
/// step and keeps the last good checkpoint.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class OptimizerKind : uint8_t { sgd, adam };

struct OptimConfig {
  double clip_ratio = 0.2;
  double kl_coeff = 0.001;
  double learning_rate = 1e-2;  // desk-scale default
  int group_size = 8;
  double adv_epsilon = 1e-8;
  OptimizerKind optimizer = OptimizerKind::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double temperature = 1.0;
  int ref_refresh_interval = 1;  // rollout rounds between snapshot refreshes

  bool valid() const;
};

/// RL and SFT mixing weights; alpha_t + gamma_t = 1.
struct HybridCoeffs {
  double alpha_t = 0.85;
  double gamma_t = 0.15;

  bool valid() const;
};

/// Group-relative advantages: (R_k - mean) / (std + eps), population std.
/// A zero-variance group yields all-zero advantages through eps.
std::vector<double> group_advantages(std::span<const double> rewards,
                                     double eps);

/// One expert target: features plus the slot tokens of the expert output.
struct ExpertExample {
  std::vector<double> features;
  std::vector<int> tokens;
};

/// G rollouts for one instance with their rewards and (weighted, group-
/// normalized) advantages.
struct GroupRollout {
  std::vector<double> features;
  std::vector<std::vector<int>> tokens;         // G x num_slots
  std::vector<double> rewards;                  // G
  std::vector<double> advantages;               // G
};

struct LossEval {
  double loss = 0.0;
  PolicyGrad grad;
};

/// Forward-KL objective: mean over batch and slots of -log pi(expert token).
LossEval sft_loss_and_grad(const PolicyParams& params,
                           std::span<const ExpertExample> batch,
                           double temperature = 1.0);

struct GrpoEval {
  double loss = 0.0;       // -surrogate + kl_coeff * kl
  double surrogate = 0.0;  // mean clipped surrogate
  double kl = 0.0;         // mean per-slot KL(pi_theta || pi_ref)
  PolicyGrad grad;
};

/// Clipped surrogate with stepwise advantage weights and a KL penalty to
/// the rollout-time snapshot. Per trajectory and slot:
///   ratio = pi_theta(token) / pi_ref(token)
///   a     = mask[slot] * advantage
///   surr  = min(ratio * a, clip(ratio, 1-eps, 1+eps) * a)
GrpoEval grpo_loss_and_grad(const PolicyParams& params,
                            const PolicyParams& ref_params,
                            std::span<const GroupRollout> rollouts,
                            std::span<const double> mask,
                            const OptimConfig& cfg);

/// Adam/SGD state sized to one parameter set.
class Optimizer {
 public:
  explicit Optimizer(const PolicyParams& params);

  /// theta -= update(grad); resets nothing between calls.
  void step(PolicyParams& params, const PolicyGrad& grad,
            const OptimConfig& cfg);

 private:
  PolicyGrad m_;
  PolicyGrad v_;
  long t_ = 0;
};

struct StepLog {
  double loss_total = 0.0;
  double loss_rl = 0.0;
  double loss_sft = 0.0;
  double kl = 0.0;
};

/// One optimizer update on alpha_t * L_GRPO + gamma_t * L_SFT. A zero
/// coefficient skips that component entirely, so degenerate coefficients
/// reproduce the pure paths bit-for-bit. Throws NumericError on a
/// non-finite loss or gradient.
StepLog hybrid_step(PolicyParams& params, const PolicyParams& ref_params,
                    std::span<const GroupRollout> rollouts,
                    std::span<const ExpertExample> sft_batch,
                    const HybridCoeffs& coeffs, std::span<const double> mask,
                    const OptimConfig& cfg, Optimizer& opt);

/// One soft-label target: features plus a target distribution per slot
/// (empty vector = slot not distilled).
struct DistillExample {
  std::vector<double> features;
  std::vector<std::vector<double>> slot_targets;
};

/// Cross-entropy to soft targets, mean over (example, distilled slot).
LossEval distill_loss_and_grad(const PolicyParams& student,
                               std::span<const DistillExample> batch,
                               double temperature = 1.0);

}  // namespace afrlab::optim
