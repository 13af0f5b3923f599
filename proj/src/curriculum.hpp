#pragma once

#include <span>
#include <vector>

#include "optim.hpp"
#include "policy.hpp"
#include "reward.hpp"
#include "rng.hpp"
#include "world.hpp"

namespace afrlab::curriculum {

enum class DifficultyBin : uint8_t { Easy, Medium, Hard, Excluded };

const char* to_string(DifficultyBin b);

/// Acc@8 thresholds: Easy >= 7 correct, Medium 2-6, Hard exactly 1,
/// Excluded 0 (never trained on).
DifficultyBin bin_for_count(int correct_count, int n_samples = 8);

struct DifficultyEstimate {
  int correct_count = 0;
  DifficultyBin bin = DifficultyBin::Excluded;
};

/// Samples n trajectories and counts the gate-passing fully correct ones
/// (all gates 1 and y_dec = label, i.e. reward exactly alpha + beta).
DifficultyEstimate estimate_difficulty(const policy::PolicyParams& params,
                                       const world::Instance& inst,
                                       const reward::RewardConfig& rcfg,
                                       int n_samples, double temperature,
                                       Rng& rng);

/// Index lists into the dataset; exhaustive and disjoint over `pool`.
struct BinnedDataset {
  std::vector<size_t> easy;
  std::vector<size_t> medium;
  std::vector<size_t> hard;
  std::vector<size_t> excluded;

  size_t trainable_size() const {
    return easy.size() + medium.size() + hard.size();
  }
};

/// Difficulty estimation per instance uses the substream keyed by the
/// instance index, so the partition is independent of iteration order.
BinnedDataset bin_dataset(const policy::PolicyParams& params,
                          const world::Dataset& ds,
                          std::span<const size_t> pool,
                          const reward::RewardConfig& rcfg, int n_samples,
                          double temperature, const Rng& root);

struct StageSpec {
  int stage = 1;
  double easy_ratio = 0.0;
  double medium_ratio = 0.0;
  double hard_ratio = 0.0;
  optim::HybridCoeffs coeffs;

  bool valid() const;
};

/// The shipped three-stage schedule: mixture ratios
/// (4.4/55.6/40.0, 3.3/41.0/55.7, 8.2/26.2/65.6 percent) with coefficients
/// (0.85,0.15), (0.90,0.10), (0.95,0.05).
std::vector<StageSpec> default_stages();

/// One training batch of dataset indices drawn per the stage mixture.
/// Empty bins redistribute their ratio proportionally across the remaining
/// bins; `used_fallback` reports that this happened.
std::vector<size_t> stage_batch(const StageSpec& stage,
                                const BinnedDataset& bins, int batch_size,
                                Rng& rng, bool* used_fallback = nullptr);

}  // namespace afrlab::curriculum
