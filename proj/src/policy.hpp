#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "grammar.hpp"
#include "rng.hpp"

namespace afrlab::policy {

using grammar::Trajectory;

/// Vocabulary size per policy-controlled slot.
using SlotLayout = std::vector<int>;

/// The 7-slot layout of the trajectory grammar.
SlotLayout afrl_layout();

enum class Capacity : uint8_t { teacher, student };

/// Student capacity: features pass through a fixed random projection of
/// this dimension before the linear layer.
inline constexpr int kStudentDim = 4;

/// Slot-factored linear-softmax policy. Each slot owns an independent
/// (vocab x input_dim) weight matrix and bias; slots are conditionally
/// independent given the features.
struct PolicyParams {
  struct Slot {
    int vocab = 0;
    std::vector<double> w;  // row-major vocab x input_dim
    std::vector<double> b;  // vocab
  };

  Capacity capacity = Capacity::teacher;
  int feature_dim = 0;  // raw feature dimension
  int input_dim = 0;    // feature_dim (teacher) or kStudentDim (student)
  std::vector<double> projection;  // student only: input_dim x feature_dim
  std::vector<Slot> slots;

  bool finite() const;
};

/// Fresh parameters with uniform(-init_scale, init_scale) entries. The
/// student projection is drawn from the same seed and kept fixed.
PolicyParams make_policy(const SlotLayout& layout, Capacity capacity,
                         int feature_dim, uint64_t init_seed,
                         double init_scale = 0.0);

/// Gradient (or any tangent) with the same shape as the parameters.
struct PolicyGrad {
  struct Slot {
    std::vector<double> w;
    std::vector<double> b;
  };
  std::vector<Slot> slots;

  void scale(double s);
  void axpy(double a, const PolicyGrad& other);  // this += a * other
  double max_abs() const;
  bool finite() const;
};

PolicyGrad zero_grad_like(const PolicyParams& params);

struct SlotDistribution {
  std::vector<double> probs;
};

/// Projects raw features to the policy's input space (identity for the
/// teacher capacity).
std::vector<double> project_features(const PolicyParams& params,
                                     std::span<const double> features);

/// softmax((W_s x + b_s) / temperature) over the slot's vocabulary.
SlotDistribution slot_distribution(const PolicyParams& params,
                                   std::span<const double> features, int slot,
                                   double temperature = 1.0);

struct SampledTokens {
  std::vector<int> tokens;
  std::vector<double> slot_logprobs;
};

SampledTokens sample_tokens(const PolicyParams& params,
                            std::span<const double> features, Rng& rng,
                            double temperature = 1.0);

struct SampledTrajectory {
  Trajectory trajectory;
  std::array<double, grammar::kNumSlots> slot_logprobs{};
};

/// Samples all 7 slots of the trajectory grammar. Requires the AFRL layout.
SampledTrajectory sample_trajectory(const PolicyParams& params,
                                    std::span<const double> features, Rng& rng,
                                    double temperature = 1.0);

std::vector<double> log_prob_tokens(const PolicyParams& params,
                                    std::span<const double> features,
                                    std::span<const int> tokens,
                                    double temperature = 1.0);

std::array<double, grammar::kNumSlots> log_prob(
    const PolicyParams& params, std::span<const double> features,
    const Trajectory& t, double temperature = 1.0);

/// Mean over the batch and slots of the Shannon entropy (natural log) of
/// the slot distributions.
double entropy(const PolicyParams& params,
               std::span<const std::vector<double>> features_batch,
               double temperature = 1.0);

/// s = sum_k k * probs[k] over a 5-way label distribution.
double weighted_expected_score(const SlotDistribution& dist);

/// Exact gradient of sum_s log pi(tokens[s] | x, s) at temperature 1.
PolicyGrad grad_log_prob(const PolicyParams& params,
                         std::span<const double> features,
                         std::span<const int> tokens);

PolicyGrad grad_log_prob(const PolicyParams& params,
                         std::span<const double> features, const Trajectory& t);

/// Adds d logits, backpropagated through the linear map, into grad:
/// grad.b[k] += dz[k]; grad.w[k,:] += dz[k] * projected.
/// `projected` must be project_features(params, raw).
void accumulate_grad_logits_slot(const PolicyParams& params,
                                 std::span<const double> projected, int slot,
                                 std::span<const double> dz, PolicyGrad& grad);

/// Adds coeff * d log pi(token | x, slot) / d theta into grad.
void accumulate_grad_log_prob_slot(const PolicyParams& params,
                                   std::span<const double> projected, int slot,
                                   int token, double coeff, double temperature,
                                   PolicyGrad& grad);

/// Adds coeff * (probs - target) backpropagated through the linear map:
/// the gradient of cross-entropy to an arbitrary target distribution.
void accumulate_grad_cross_entropy_slot(const PolicyParams& params,
                                        std::span<const double> projected,
                                        int slot,
                                        std::span<const double> target,
                                        std::span<const double> probs,
                                        double coeff, double temperature,
                                        PolicyGrad& grad);

/// Greedy (argmax) tokens at temperature 1.
std::vector<int> argmax_tokens(const PolicyParams& params,
                               std::span<const double> features);

// JSON serialization with a shape header; format_version pins the layout.
std::string to_json(const PolicyParams& params);
PolicyParams params_from_json(const std::string& text);

}  // namespace afrlab::policy
