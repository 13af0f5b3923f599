#include "optim.hpp"

#include <algorithm>
#include <cmath>

namespace afrlab::optim {

namespace {

double clamp_ratio(double r, double eps) {
  return std::clamp(r, 1.0 - eps, 1.0 + eps);
}

std::vector<double> slot_probs(const PolicyParams& p,
                               std::span<const double> raw_features, int slot,
                               double temperature) {
  return policy::slot_distribution(p, raw_features, slot, temperature).probs;
}

}  // namespace

bool OptimConfig::valid() const {
  if (!(clip_ratio > 0.0 && clip_ratio < 1.0)) return false;
  if (kl_coeff < 0.0) return false;
  if (group_size < 2) return false;
  if (!(learning_rate > 0.0)) return false;
  if (!(temperature > 0.0)) return false;
  if (ref_refresh_interval < 1) return false;
  return true;
}

bool HybridCoeffs::valid() const {
  if (alpha_t < 0.0 || gamma_t < 0.0) return false;
  return std::abs(alpha_t + gamma_t - 1.0) <= 1e-9;
}

std::vector<double> group_advantages(std::span<const double> rewards,
                                     double eps) {
  if (rewards.size() < 2) {
    throw std::invalid_argument("group_advantages: need at least 2 rewards");
  }
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= n;
  const double denom = std::sqrt(var) + eps;
  std::vector<double> adv(rewards.size());
  for (size_t i = 0; i < rewards.size(); ++i) {
    adv[i] = (rewards[i] - mean) / denom;
  }
  return adv;
}

LossEval sft_loss_and_grad(const PolicyParams& params,
                           std::span<const ExpertExample> batch,
                           double temperature) {
  if (batch.empty()) {
    throw std::invalid_argument("sft_loss_and_grad: empty batch");
  }
  LossEval out;
  out.grad = policy::zero_grad_like(params);
  const size_t num_slots = params.slots.size();
  const double denom = static_cast<double>(batch.size() * num_slots);
  for (const ExpertExample& ex : batch) {
    const auto x = policy::project_features(params, ex.features);
    const auto lp =
        policy::log_prob_tokens(params, ex.features, ex.tokens, temperature);
    for (size_t s = 0; s < num_slots; ++s) {
      out.loss -= lp[s] / denom;
      policy::accumulate_grad_log_prob_slot(params, x, static_cast<int>(s),
                                            ex.tokens[s], -1.0 / denom,
                                            temperature, out.grad);
    }
  }
  return out;
}

GrpoEval grpo_loss_and_grad(const PolicyParams& params,
                            const PolicyParams& ref_params,
                            std::span<const GroupRollout> rollouts,
                            std::span<const double> mask,
                            const OptimConfig& cfg) {
  if (rollouts.empty()) {
    throw std::invalid_argument("grpo_loss_and_grad: no rollouts");
  }
  const size_t num_slots = params.slots.size();
  if (mask.size() != num_slots) {
    throw std::invalid_argument("grpo_loss_and_grad: mask size mismatch");
  }
  GrpoEval out;
  out.grad = policy::zero_grad_like(params);

  size_t total_samples = 0;
  for (const auto& g : rollouts) total_samples += g.tokens.size();
  const double surr_denom = static_cast<double>(total_samples * num_slots);
  const double kl_denom = static_cast<double>(rollouts.size() * num_slots);
  const double T = cfg.temperature;

  std::vector<double> dz;
  for (const GroupRollout& group : rollouts) {
    const auto x = policy::project_features(params, group.features);
    for (size_t s = 0; s < num_slots; ++s) {
      const auto p_new = slot_probs(params, group.features,
                                    static_cast<int>(s), T);
      const auto p_ref = slot_probs(ref_params, group.features,
                                    static_cast<int>(s), T);
      // Clipped surrogate across the group's samples.
      for (size_t k = 0; k < group.tokens.size(); ++k) {
        const int tok = group.tokens[k][s];
        const double ref_prob = p_ref[static_cast<size_t>(tok)];
        if (!(ref_prob > 0.0)) {
          throw NumericError("reference probability vanished for a sampled token");
        }
        const double ratio = p_new[static_cast<size_t>(tok)] / ref_prob;
        const double a = mask[s] * group.advantages[k];
        const double unclipped = ratio * a;
        const double clipped = clamp_ratio(ratio, cfg.clip_ratio) * a;
        out.surrogate += std::min(unclipped, clipped) / surr_denom;
        if (unclipped <= clipped) {
          // Gradient flows through the unclipped branch only; the clipped
          // branch is constant in theta wherever it actually binds.
          policy::accumulate_grad_log_prob_slot(
              params, x, static_cast<int>(s), tok,
              -(a * ratio) / surr_denom, T, out.grad);
        }
      }
      // KL(pi_theta || pi_ref), one term per (instance, slot).
      double kl = 0.0;
      for (size_t j = 0; j < p_new.size(); ++j) {
        kl += p_new[j] * (std::log(p_new[j]) - std::log(p_ref[j]));
      }
      out.kl += kl / kl_denom;
      if (cfg.kl_coeff > 0.0) {
        dz.assign(p_new.size(), 0.0);
        for (size_t j = 0; j < p_new.size(); ++j) {
          dz[j] = cfg.kl_coeff / kl_denom * p_new[j] *
                  ((std::log(p_new[j]) - std::log(p_ref[j])) - kl) / T;
        }
        policy::accumulate_grad_logits_slot(params, x, static_cast<int>(s), dz,
                                            out.grad);
      }
    }
  }
  out.loss = -out.surrogate + cfg.kl_coeff * out.kl;
  return out;
}

Optimizer::Optimizer(const PolicyParams& params)
    : m_(policy::zero_grad_like(params)), v_(policy::zero_grad_like(params)) {}

void Optimizer::step(PolicyParams& params, const PolicyGrad& grad,
                     const OptimConfig& cfg) {
  if (!grad.finite()) throw NumericError("non-finite gradient");
  if (cfg.optimizer == OptimizerKind::sgd) {
    for (size_t i = 0; i < params.slots.size(); ++i) {
      auto& slot = params.slots[i];
      for (size_t j = 0; j < slot.w.size(); ++j) {
        slot.w[j] -= cfg.learning_rate * grad.slots[i].w[j];
      }
      for (size_t j = 0; j < slot.b.size(); ++j) {
        slot.b[j] -= cfg.learning_rate * grad.slots[i].b[j];
      }
    }
    return;
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(t_));
  for (size_t i = 0; i < params.slots.size(); ++i) {
    auto& slot = params.slots[i];
    auto update = [&](std::vector<double>& theta, std::vector<double>& m,
                      std::vector<double>& v, const std::vector<double>& g) {
      for (size_t j = 0; j < theta.size(); ++j) {
        m[j] = cfg.adam_beta1 * m[j] + (1.0 - cfg.adam_beta1) * g[j];
        v[j] = cfg.adam_beta2 * v[j] + (1.0 - cfg.adam_beta2) * g[j] * g[j];
        const double mhat = m[j] / bc1;
        const double vhat = v[j] / bc2;
        theta[j] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
      }
    };
    update(slot.w, m_.slots[i].w, v_.slots[i].w, grad.slots[i].w);
    update(slot.b, m_.slots[i].b, v_.slots[i].b, grad.slots[i].b);
  }
}

StepLog hybrid_step(PolicyParams& params, const PolicyParams& ref_params,
                    std::span<const GroupRollout> rollouts,
                    std::span<const ExpertExample> sft_batch,
                    const HybridCoeffs& coeffs, std::span<const double> mask,
                    const OptimConfig& cfg, Optimizer& opt) {
  if (!coeffs.valid()) throw std::invalid_argument("invalid hybrid coeffs");
  StepLog log;
  PolicyGrad total = policy::zero_grad_like(params);
  if (coeffs.alpha_t > 0.0) {
    GrpoEval rl = grpo_loss_and_grad(params, ref_params, rollouts, mask, cfg);
    log.loss_rl = rl.loss;
    log.kl = rl.kl;
    total.axpy(coeffs.alpha_t, rl.grad);
  }
  if (coeffs.gamma_t > 0.0) {
    LossEval sft = sft_loss_and_grad(params, sft_batch, cfg.temperature);
    log.loss_sft = sft.loss;
    total.axpy(coeffs.gamma_t, sft.grad);
  }
  log.loss_total = coeffs.alpha_t * log.loss_rl + coeffs.gamma_t * log.loss_sft;
  if (!std::isfinite(log.loss_total)) {
    throw NumericError("non-finite hybrid loss");
  }
  opt.step(params, total, cfg);
  if (!params.finite()) throw NumericError("non-finite parameters after step");
  return log;
}

LossEval distill_loss_and_grad(const PolicyParams& student,
                               std::span<const DistillExample> batch,
                               double temperature) {
  if (batch.empty()) {
    throw std::invalid_argument("distill_loss_and_grad: empty batch");
  }
  LossEval out;
  out.grad = policy::zero_grad_like(student);
  size_t terms = 0;
  for (const auto& ex : batch) {
    for (const auto& target : ex.slot_targets) {
      if (!target.empty()) ++terms;
    }
  }
  if (terms == 0) {
    throw std::invalid_argument("distill_loss_and_grad: no slot targets");
  }
  const double denom = static_cast<double>(terms);
  for (const auto& ex : batch) {
    const auto x = policy::project_features(student, ex.features);
    for (size_t s = 0; s < ex.slot_targets.size(); ++s) {
      const auto& target = ex.slot_targets[s];
      if (target.empty()) continue;
      const auto probs = policy::slot_distribution(student, ex.features,
                                                   static_cast<int>(s),
                                                   temperature)
                             .probs;
      for (size_t k = 0; k < probs.size(); ++k) {
        if (target[k] > 0.0) {
          out.loss -= target[k] * std::log(probs[k]) / denom;
        }
      }
      policy::accumulate_grad_cross_entropy_slot(
          student, x, static_cast<int>(s), target, probs, 1.0 / denom,
          temperature, out.grad);
    }
  }
  return out;
}

}  // namespace afrlab::optim
