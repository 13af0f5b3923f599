#include "kl_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace afrlab::kl_lab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> bump_weights(size_t n, double center, double width) {
  std::vector<double> w(n);
  for (size_t i = 0; i < n; ++i) {
    const double d = (static_cast<double>(i) - center) / width;
    w[i] = std::exp(-0.5 * d * d);
  }
  return w;
}

Categorical normalized(std::vector<double> w) {
  double total = 0.0;
  for (double v : w) total += v;
  for (double& v : w) v /= total;
  return Categorical{std::move(w)};
}

double region_mass(const Categorical& q, double center, double half_width) {
  double mass = 0.0;
  for (size_t i = 0; i < q.probs.size(); ++i) {
    if (std::abs(static_cast<double>(i) - center) <= half_width) {
      mass += q.probs[i];
    }
  }
  return mass;
}

}  // namespace

bool Categorical::valid(double tol) const {
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) return false;
    total += p;
  }
  return std::abs(total - 1.0) <= tol;
}

Categorical uniform_categorical(size_t n) {
  if (n == 0) throw std::invalid_argument("empty outcome space");
  return Categorical{std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

Categorical random_categorical(size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("empty outcome space");
  std::vector<double> w(n);
  for (double& v : w) v = -std::log(1.0 - rng.uniform());
  return normalized(std::move(w));
}

double forward_kl(const Categorical& p, const Categorical& q) {
  if (p.probs.size() != q.probs.size()) {
    throw std::invalid_argument("size mismatch");
  }
  double kl = 0.0;
  for (size_t i = 0; i < p.probs.size(); ++i) {
    if (p.probs[i] == 0.0) continue;  // 0 ln 0 = 0
    if (q.probs[i] == 0.0) return kInf;
    kl += p.probs[i] * std::log(p.probs[i] / q.probs[i]);
  }
  return kl;
}

double reverse_kl(const Categorical& q, const Categorical& p) {
  return forward_kl(q, p);
}

double shannon_entropy(const Categorical& p) {
  double h = 0.0;
  for (double v : p.probs) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

Categorical gibbs_policy(const GibbsSpec& spec) {
  if (!(spec.gibbs_temperature > 0.0)) {
    throw std::invalid_argument("gibbs temperature must be > 0");
  }
  if (spec.rewards.empty()) throw std::invalid_argument("empty rewards");
  const double hi = *std::max_element(spec.rewards.begin(), spec.rewards.end());
  std::vector<double> w(spec.rewards.size());
  for (size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp((spec.rewards[i] - hi) / spec.gibbs_temperature);
  }
  return normalized(std::move(w));
}

double log_partition(const GibbsSpec& spec) {
  const double hi = *std::max_element(spec.rewards.begin(), spec.rewards.end());
  double total = 0.0;
  for (double r : spec.rewards) {
    total += std::exp((r - hi) / spec.gibbs_temperature);
  }
  return std::log(total) + hi / spec.gibbs_temperature;
}

double verify_sft_identity(const Categorical& p, const Categorical& q) {
  double cross_entropy = 0.0;
  for (size_t i = 0; i < p.probs.size(); ++i) {
    if (p.probs[i] > 0.0) cross_entropy -= p.probs[i] * std::log(q.probs[i]);
  }
  return forward_kl(p, q) - (cross_entropy - shannon_entropy(p));
}

double verify_rl_identity(const Categorical& q, const GibbsSpec& spec) {
  const Categorical pi_star = gibbs_policy(spec);
  double expected_reward = 0.0;
  for (size_t i = 0; i < q.probs.size(); ++i) {
    expected_reward += q.probs[i] * spec.rewards[i];
  }
  const double rhs = -shannon_entropy(q) -
                     expected_reward / spec.gibbs_temperature +
                     log_partition(spec);
  return forward_kl(q, pi_star) - rhs;
}

Categorical bimodal_target(size_t grid_size) {
  auto lo = bump_weights(grid_size, kModeLowCenter, 2.0);
  const auto hi = bump_weights(grid_size, kModeHighCenter, 2.0);
  for (size_t i = 0; i < grid_size; ++i) lo[i] = 0.5 * lo[i] + 0.5 * hi[i];
  return normalized(std::move(lo));
}

Categorical unimodal_target(size_t grid_size, double center) {
  return normalized(bump_weights(grid_size, center, 2.0));
}

FitResult fit_divergence(const Categorical& target, const FitFamily& family,
                         FitDirection direction, int steps, double lr,
                         uint64_t seed) {
  const size_t n = family.grid_size;
  if (target.probs.size() != n) {
    throw std::invalid_argument("target size does not match the grid");
  }
  Rng rng(splitmix64(seed ^ 0x6b6c666974ULL));
  double mu = rng.uniform(5.0, static_cast<double>(n) - 6.0);
  double w = rng.uniform(4.0, 12.0);

  const auto family_probs = [&](double mu_, double w_) {
    return normalized(bump_weights(n, mu_, w_));
  };
  const auto divergence = [&](const Categorical& q) {
    return direction == FitDirection::forward ? forward_kl(target, q)
                                              : reverse_kl(q, target);
  };

  FitResult res;
  for (int step = 0; step < steps; ++step) {
    const Categorical q = family_probs(mu, w);
    // Analytic gradient through g_i = -(i-mu)^2 / (2 w^2), q = softmax(g).
    // d g_i / d mu = (i-mu)/w^2 ; d g_i / d w = (i-mu)^2 / w^3.
    double mean_dmu = 0.0, mean_dw = 0.0;
    std::vector<double> dmu(n), dw(n);
    for (size_t i = 0; i < n; ++i) {
      const double d = static_cast<double>(i) - mu;
      dmu[i] = d / (w * w);
      dw[i] = d * d / (w * w * w);
      mean_dmu += q.probs[i] * dmu[i];
      mean_dw += q.probs[i] * dw[i];
    }
    double gmu = 0.0, gw = 0.0;
    if (direction == FitDirection::forward) {
      // d/dtheta KL(p||q) = -sum_i p_i (dg_i - E_q[dg])
      for (size_t i = 0; i < n; ++i) {
        gmu -= target.probs[i] * (dmu[i] - mean_dmu);
        gw -= target.probs[i] * (dw[i] - mean_dw);
      }
    } else {
      // d/dtheta KL(q||p): dq_i = q_i (dg_i - E_q[dg])
      for (size_t i = 0; i < n; ++i) {
        const double score = std::log(q.probs[i] / target.probs[i]) + 1.0;
        gmu += q.probs[i] * (dmu[i] - mean_dmu) * score;
        gw += q.probs[i] * (dw[i] - mean_dw) * score;
      }
    }
    if (!std::isfinite(gmu) || !std::isfinite(gw)) {
      throw std::runtime_error("fit_divergence: non-finite gradient");
    }
    mu -= lr * gmu;
    w -= lr * gw;
    mu = std::clamp(mu, 0.0, static_cast<double>(n - 1));
    w = std::clamp(w, family.min_width, family.max_width);
    if (step % 10 == 0 || step == steps - 1) {
      res.trace.push_back({step, divergence(family_probs(mu, w)), mu, w});
    }
  }
  res.location = mu;
  res.width = w;
  res.fitted = family_probs(mu, w);
  res.mode_mass_low =
      region_mass(res.fitted, kModeLowCenter, kModeRegionHalfWidth);
  res.mode_mass_high =
      region_mass(res.fitted, kModeHighCenter, kModeRegionHalfWidth);
  return res;
}

}  // namespace afrlab::kl_lab
