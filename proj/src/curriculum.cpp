#include "curriculum.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "grammar.hpp"

namespace afrlab::curriculum {

const char* to_string(DifficultyBin b) {
  switch (b) {
    case DifficultyBin::Easy: return "easy";
    case DifficultyBin::Medium: return "medium";
    case DifficultyBin::Hard: return "hard";
    case DifficultyBin::Excluded: return "excluded";
  }
  return "?";
}

DifficultyBin bin_for_count(int correct_count, int n_samples) {
  if (correct_count < 0 || correct_count > n_samples) {
    throw std::invalid_argument("bin_for_count: count out of range");
  }
  if (correct_count == 0) return DifficultyBin::Excluded;
  if (correct_count == 1) return DifficultyBin::Hard;
  if (correct_count <= 6) return DifficultyBin::Medium;
  return DifficultyBin::Easy;
}

DifficultyEstimate estimate_difficulty(const policy::PolicyParams& params,
                                       const world::Instance& inst,
                                       const reward::RewardConfig& rcfg,
                                       int n_samples, double temperature,
                                       Rng& rng) {
  if (n_samples < 1) {
    throw std::invalid_argument("estimate_difficulty: n_samples must be >= 1");
  }
  DifficultyEstimate est;
  for (int i = 0; i < n_samples; ++i) {
    const auto sample =
        policy::sample_trajectory(params, inst.features, rng, temperature);
    const auto breakdown = reward::total_reward(
        grammar::render_trajectory(sample.trajectory), inst.label, rcfg);
    const bool correct = breakdown.i_fmt == 1 && breakdown.i_cst == 1 &&
                         breakdown.i_logic == 1 &&
                         sample.trajectory.y_dec == inst.label;
    if (correct) ++est.correct_count;
  }
  est.bin = bin_for_count(est.correct_count, n_samples);
  return est;
}

BinnedDataset bin_dataset(const policy::PolicyParams& params,
                          const world::Dataset& ds,
                          std::span<const size_t> pool,
                          const reward::RewardConfig& rcfg, int n_samples,
                          double temperature, const Rng& root) {
  BinnedDataset bins;
  for (size_t idx : pool) {
    if (idx >= ds.instances.size()) {
      throw std::invalid_argument("bin_dataset: index out of range");
    }
    Rng sub = root.substream(idx);
    const auto est = estimate_difficulty(params, ds.instances[idx], rcfg,
                                         n_samples, temperature, sub);
    switch (est.bin) {
      case DifficultyBin::Easy: bins.easy.push_back(idx); break;
      case DifficultyBin::Medium: bins.medium.push_back(idx); break;
      case DifficultyBin::Hard: bins.hard.push_back(idx); break;
      case DifficultyBin::Excluded: bins.excluded.push_back(idx); break;
    }
  }
  return bins;
}

bool StageSpec::valid() const {
  if (stage < 1) return false;
  if (easy_ratio < 0.0 || medium_ratio < 0.0 || hard_ratio < 0.0) return false;
  const double total = easy_ratio + medium_ratio + hard_ratio;
  return std::abs(total - 1.0) <= 1e-9 && coeffs.valid();
}

std::vector<StageSpec> default_stages() {
  return {
      {1, 0.044, 0.556, 0.400, {0.85, 0.15}},
      {2, 0.033, 0.410, 0.557, {0.90, 0.10}},
      {3, 0.082, 0.262, 0.656, {0.95, 0.05}},
  };
}

std::vector<size_t> stage_batch(const StageSpec& stage,
                                const BinnedDataset& bins, int batch_size,
                                Rng& rng, bool* used_fallback) {
  if (batch_size < 1) {
    throw std::invalid_argument("stage_batch: batch_size must be >= 1");
  }
  const std::array<const std::vector<size_t>*, 3> lists = {
      &bins.easy, &bins.medium, &bins.hard};
  std::array<double, 3> weights = {stage.easy_ratio, stage.medium_ratio,
                                   stage.hard_ratio};
  bool fallback = false;
  double total = 0.0;
  for (size_t i = 0; i < 3; ++i) {
    if (lists[i]->empty()) {
      if (weights[i] > 0.0) fallback = true;
      weights[i] = 0.0;
    }
    total += weights[i];
  }
  if (used_fallback != nullptr) *used_fallback = fallback;
  if (total <= 0.0) {
    // Requested bins all empty: fall back to whatever is trainable.
    for (size_t i = 0; i < 3; ++i) {
      weights[i] = lists[i]->empty() ? 0.0 : 1.0;
      total += weights[i];
    }
    if (total <= 0.0) {
      throw std::runtime_error("stage_batch: all difficulty bins are empty");
    }
  }
  std::vector<size_t> batch;
  batch.reserve(static_cast<size_t>(batch_size));
  for (int i = 0; i < batch_size; ++i) {
    const size_t bin = rng.categorical(weights);
    const auto& list = *lists[bin];
    batch.push_back(list[rng.below(list.size())]);
  }
  return batch;
}

}  // namespace afrlab::curriculum
