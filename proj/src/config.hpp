#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "curriculum.hpp"
#include "optim.hpp"
#include "reward.hpp"
#include "world.hpp"

#include "json.hpp"

namespace afrlab::config {

/// Invalid or unreadable configuration; maps to CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class TrainMode : uint8_t { mode_balanced, pure_grpo, sft_only };
enum class SamplingMode : uint8_t { curriculum, random };

const char* to_string(TrainMode m);
const char* to_string(SamplingMode m);
TrainMode train_mode_from_string(const std::string& s);
SamplingMode sampling_mode_from_string(const std::string& s);

struct DistillConfig {
  std::string teacher_params_path;  // empty: train the teacher first
  std::string student_capacity = "student";
  int steps = 1500;
  int batch_size = 64;
  double learning_rate = 1e-2;
  bool all_slots = false;
  uint64_t init_seed = 7;
};

struct ExperimentConfig {
  world::WorldConfig world;
  reward::RewardConfig reward;
  optim::OptimConfig optim;
  std::vector<curriculum::StageSpec> stages = curriculum::default_stages();
  int steps_per_stage = 2000;
  int sft_warmup_steps = 500;
  TrainMode mode = TrainMode::mode_balanced;
  SamplingMode sampling = SamplingMode::curriculum;
  size_t n_instances = 10000;
  double holdout_fraction = 0.2;
  int batch_size = 64;
  int sft_batch_size = 64;
  int eval_interval = 100;
  int eval_group_size = 5;   // pseudo-query size for ranking metrics
  int probe_size = 64;       // instances used for reward mean/std probes
  int acc_at_samples = 8;    // samplings per prompt for difficulty
  bool static_binning = false;
  uint64_t seed = 1;
  std::string output_dir;
  bool deterministic = true;
  DistillConfig distill;
};

/// Parses with defaults for missing fields; throws ConfigError on unknown
/// enum values, malformed JSON, or invariant violations.
ExperimentConfig experiment_from_json(const nlohmann::json& j);
nlohmann::json experiment_to_json(const ExperimentConfig& cfg);

/// `source` is inline JSON when it starts with '{', otherwise a file path.
nlohmann::json load_json(const std::string& source);
ExperimentConfig load_experiment(const std::string& source);

/// Stable FNV-1a hash of the canonical config dump, for run manifests.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace afrlab::config
