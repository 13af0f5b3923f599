#pragma once

#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "metrics.hpp"
#include "policy.hpp"
#include "world.hpp"

namespace afrlab::runner {

using config::ExperimentConfig;

inline constexpr const char* kCodeVersion = "afrlab 0.1.0";

struct Manifest {
  std::string code_version = kCodeVersion;
  uint64_t seed = 0;
  std::string config_hash;
};

/// Per-step optimization ledger row (every step; evals are sparser).
struct StepRecord {
  long step = 0;
  int stage = 0;  // 0 = SFT warmup
  double alpha_t = 0.0;
  double gamma_t = 0.0;
  double loss_total = 0.0;
  double loss_rl = 0.0;
  double loss_sft = 0.0;
  double kl = 0.0;
};

struct RunLog {
  Manifest manifest;
  std::vector<metrics::MetricsRecord> rows;   // eval cadence
  std::vector<StepRecord> steps;              // every training step
};

// Export formats. The JSONL export is one manifest line followed by one
// line per MetricsRecord; CSV uses the frozen header below.
inline constexpr const char* kMetricsCsvHeader =
    "step,reward_mean,reward_std,entropy,five_acc,two_acc,macro_f1,"
    "weighted_f1,pair_acc,ndcg3,longtail_checkpoint_acc";

std::string export_jsonl(const RunLog& log);
std::string export_csv(const RunLog& log);
RunLog import_jsonl(const std::string& text);

struct TrainResult {
  RunLog log;
  policy::PolicyParams params;
  world::Dataset dataset;            // as generated (train + holdout)
  std::vector<size_t> train_indices;
  std::vector<size_t> holdout_indices;
};

/// Algorithm: cold-start SFT warmup, then the staged loop — sample a batch
/// per the sampling mode, roll out G trajectories per instance, score,
/// normalize group advantages, weight by the slot mask, add the stage's
/// SFT anchor, and step. Evaluates the metric suite on the held-out split
/// every eval_interval steps. Writes runlog/params files into
/// cfg.output_dir when it is non-empty.
TrainResult run_training(const ExperimentConfig& cfg);

struct AblationResult {
  std::vector<std::string> labels;  // "<mode>/<sampling>" per run
  std::vector<RunLog> logs;
  std::string side_by_side_csv;
  nlohmann::json summary;
};

/// Runs configs that must share world and seed and differ only in mode or
/// sampling; emits a side-by-side CSV of metric trajectories and a summary
/// with final metrics and the reward-crossing efficiency probe.
AblationResult run_ablation(const std::vector<ExperimentConfig>& configs);

struct DistillReport {
  double teacher_acc = 0.0;
  double student_acc = 0.0;
  double student_init_acc = 0.0;
  double gap = 0.0;  // teacher_acc - student_acc
  std::string student_capacity;
  nlohmann::json to_json() const;
};

struct DistillResult {
  policy::PolicyParams student;
  DistillReport report;
};

/// Trains a student against the teacher's decision-slot soft labels
/// (all 7 slots when cfg.distill.all_slots). The teacher comes from
/// cfg.distill.teacher_params_path, or is trained per cfg when that is
/// empty. Zero steps leaves the student at its random initialization.
DistillResult run_distill(const ExperimentConfig& cfg);

/// kl-lab verification report: identity residual maxima over randomized
/// instances, Gibbs optimality spot checks, and the 10-seed mode-mass
/// table for both fit directions. Also returns the fit-trace CSV.
struct KlLabResult {
  nlohmann::json report;
  std::string traces_csv;
};

KlLabResult run_kl_lab();

/// Greedy evaluation of a policy on a slice of instances, as used for the
/// metric suite: y_pred = argmax decision slot, score = weighted expected
/// score, pseudo-queries of eval_group_size consecutive instances.
std::vector<metrics::PredictionRecord> evaluate_policy(
    const policy::PolicyParams& params, const world::Dataset& ds,
    const std::vector<size_t>& indices, int eval_group_size);

/// Exact checkpoint-pattern match rate of greedy predictions, restricted
/// to long-tail instances. Nullopt when the slice has none.
std::optional<double> longtail_checkpoint_accuracy(
    const policy::PolicyParams& params, const world::Dataset& ds,
    const std::vector<size_t>& indices);

}  // namespace afrlab::runner
