#pragma once

#include <span>
#include <vector>

#include "rng.hpp"

namespace afrlab::kl_lab {

/// Finite categorical distribution.
struct Categorical {
  std::vector<double> probs;

  bool valid(double tol = 1e-12) const;
};

Categorical uniform_categorical(size_t n);
Categorical random_categorical(size_t n, Rng& rng);

/// Entropy-regularized optimal policy: pi*(x) = exp(R(x)/eta) / Z.
struct GibbsSpec {
  std::vector<double> rewards;
  double gibbs_temperature = 1.0;  // eta
};

/// D_KL(p || q) = sum p ln(p/q), with 0 ln 0 = 0. Returns +infinity when
/// p has mass outside q's support (zero-forcing made literal).
double forward_kl(const Categorical& p, const Categorical& q);

/// D_KL(q || p): the mode-seeking direction.
double reverse_kl(const Categorical& q, const Categorical& p);

double shannon_entropy(const Categorical& p);

/// Normalized exp(R/eta), computed with a max shift.
Categorical gibbs_policy(const GibbsSpec& spec);

/// ln Z for the spec (max-shifted).
double log_partition(const GibbsSpec& spec);

/// Residual of D_KL(P||Q) = -H(P) + CE(P,Q); numerically ~0 always.
double verify_sft_identity(const Categorical& p, const Categorical& q);

/// Residual of D_KL(q||pi*) = -H(q) - E_q[R]/eta + ln Z.
double verify_rl_identity(const Categorical& q, const GibbsSpec& spec);

// --- constrained-family divergence fits -------------------------------------

enum class FitDirection : uint8_t { forward, reverse };

/// Discretized single-bump family on the demo grid: location mu, width w
/// (projected to [min_width, max_width], capped below the inter-mode
/// distance so both target modes can never be matched at once).
struct FitFamily {
  size_t grid_size = 50;
  double min_width = 1.0;
  double max_width = 25.0;
};

struct FitTraceRow {
  int step;
  double divergence;
  double location;
  double width;
};

struct FitResult {
  double location = 0.0;
  double width = 0.0;
  Categorical fitted;
  double mode_mass_low = 0.0;   // mass within +-5 of the low-mode center
  double mode_mass_high = 0.0;  // mass within +-5 of the high-mode center
  std::vector<FitTraceRow> trace;
};

/// The standard demo target: equal-weight mixture of bumps at grid
/// positions 10 and 40 (sigma 2) on a 50-point grid.
Categorical bimodal_target(size_t grid_size = 50);
Categorical unimodal_target(size_t grid_size = 50, double center = 25.0);

inline constexpr double kModeLowCenter = 10.0;
inline constexpr double kModeHighCenter = 40.0;
inline constexpr double kModeRegionHalfWidth = 5.0;

/// Gradient descent on the chosen divergence between the target and the
/// constrained family; seed controls the (asymmetric) initialization.
FitResult fit_divergence(const Categorical& target, const FitFamily& family,
                         FitDirection direction, int steps, double lr,
                         uint64_t seed);

}  // namespace afrlab::kl_lab
