#include "runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "curriculum.hpp"
#include "grammar.hpp"
#include "kl_lab.hpp"
#include "optim.hpp"
#include "reward.hpp"
#include "rng.hpp"

namespace afrlab::runner {

namespace {

using config::ConfigError;
using config::SamplingMode;
using config::TrainMode;

// Substream purposes; labels keep the streams decorrelated and independent
// of mode, so runs sharing (world, seed) share their warmup bit-for-bit.
constexpr uint64_t kStreamSftBatch = 0x01;
constexpr uint64_t kStreamRlBatch = 0x02;
constexpr uint64_t kStreamRollout = 0x03;
constexpr uint64_t kStreamBinning = 0x04;
constexpr uint64_t kStreamProbePick = 0x05;
constexpr uint64_t kStreamProbeRoll = 0x06;
constexpr uint64_t kStreamDistill = 0x07;
constexpr uint64_t kStreamPolicyInit = 0x08;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void write_text_file(const std::string& dir, const std::string& name,
                     const std::string& content) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / name, std::ios::binary);
  out << content;
}

nlohmann::json metrics_row_to_json(const metrics::MetricsRecord& r) {
  return {{"step", r.step},
          {"reward_mean", r.reward_mean},
          {"reward_std", r.reward_std},
          {"entropy", r.entropy},
          {"five_acc", r.five_acc},
          {"two_acc", r.two_acc},
          {"macro_f1", r.macro_f1},
          {"weighted_f1", r.weighted_f1},
          {"pair_acc", r.pair_acc},
          {"ndcg3", r.ndcg3},
          {"longtail_checkpoint_acc", r.longtail_checkpoint_acc}};
}

metrics::MetricsRecord metrics_row_from_json(const nlohmann::json& j) {
  metrics::MetricsRecord r;
  r.step = j.at("step").get<long>();
  r.reward_mean = j.at("reward_mean").get<double>();
  r.reward_std = j.at("reward_std").get<double>();
  r.entropy = j.at("entropy").get<double>();
  r.five_acc = j.at("five_acc").get<double>();
  r.two_acc = j.at("two_acc").get<double>();
  r.macro_f1 = j.at("macro_f1").get<double>();
  r.weighted_f1 = j.at("weighted_f1").get<double>();
  r.pair_acc = j.at("pair_acc").get<double>();
  r.ndcg3 = j.at("ndcg3").get<double>();
  r.longtail_checkpoint_acc = j.at("longtail_checkpoint_acc").get<double>();
  return r;
}

std::string steps_csv(const RunLog& log) {
  std::string out = "step,stage,alpha_t,gamma_t,loss_total,loss_rl,loss_sft,kl\n";
  for (const auto& s : log.steps) {
    out += std::to_string(s.step) + ',' + std::to_string(s.stage) + ',' +
           format_double(s.alpha_t) + ',' + format_double(s.gamma_t) + ',' +
           format_double(s.loss_total) + ',' + format_double(s.loss_rl) + ',' +
           format_double(s.loss_sft) + ',' + format_double(s.kl) + '\n';
  }
  return out;
}

optim::HybridCoeffs coeffs_for(TrainMode mode, int stage,
                               const std::vector<curriculum::StageSpec>& stages) {
  if (stage == 0) return {0.0, 1.0};  // cold-start SFT
  switch (mode) {
    case TrainMode::pure_grpo: return {1.0, 0.0};
    case TrainMode::sft_only: return {0.0, 1.0};
    case TrainMode::mode_balanced: break;
  }
  return stages[static_cast<size_t>(stage - 1)].coeffs;
}

std::vector<int> expert_tokens(const world::Instance& inst) {
  const auto tokens = grammar::slot_tokens(world::expert_trajectory(inst));
  return std::vector<int>(tokens.begin(), tokens.end());
}

struct RewardStats {
  double mean = 0.0;
  double stddev = 0.0;
};

RewardStats probe_rewards(const policy::PolicyParams& params,
                          const world::Dataset& ds,
                          const std::vector<size_t>& probe,
                          const config::ExperimentConfig& cfg, const Rng& root,
                          long step) {
  std::vector<double> rewards;
  rewards.reserve(probe.size() * static_cast<size_t>(cfg.optim.group_size));
  const Rng stream = root.substream(kStreamProbeRoll)
                         .substream(static_cast<uint64_t>(step));
  for (size_t p = 0; p < probe.size(); ++p) {
    const world::Instance& inst = ds.instances[probe[p]];
    Rng rng = stream.substream(p);
    for (int g = 0; g < cfg.optim.group_size; ++g) {
      const auto s = policy::sample_trajectory(params, inst.features, rng,
                                               cfg.optim.temperature);
      rewards.push_back(
          reward::total_reward(grammar::render_trajectory(s.trajectory),
                               inst.label, cfg.reward)
              .total);
    }
  }
  RewardStats st;
  for (double r : rewards) st.mean += r;
  st.mean /= static_cast<double>(rewards.size());
  double var = 0.0;
  for (double r : rewards) var += (r - st.mean) * (r - st.mean);
  st.stddev = std::sqrt(var / static_cast<double>(rewards.size()));
  return st;
}

metrics::MetricsRecord eval_suite(const policy::PolicyParams& params,
                                  const world::Dataset& ds,
                                  const std::vector<size_t>& holdout,
                                  const std::vector<size_t>& probe,
                                  const config::ExperimentConfig& cfg,
                                  const Rng& root, long step) {
  metrics::MetricsRecord row;
  row.step = step;
  const auto st = probe_rewards(params, ds, probe, cfg, root, step);
  row.reward_mean = st.mean;
  row.reward_std = st.stddev;

  const auto records =
      evaluate_policy(params, ds, holdout, cfg.eval_group_size);
  row.five_acc = metrics::five_acc(records);
  row.two_acc = metrics::two_acc(records);
  const auto prf = metrics::per_class_prf(records);
  row.macro_f1 = prf.macro_f1;
  row.weighted_f1 = prf.weighted_f1;
  row.pair_acc = metrics::pair_acc(records).value_or(0.0);
  row.ndcg3 = metrics::ndcg_at_k(records, 3).value_or(0.0);

  std::vector<std::vector<double>> features;
  features.reserve(holdout.size());
  for (size_t idx : holdout) features.push_back(ds.instances[idx].features);
  row.entropy = policy::entropy(params, features, cfg.optim.temperature);
  row.longtail_checkpoint_acc =
      longtail_checkpoint_accuracy(params, ds, holdout).value_or(0.0);
  return row;
}

std::vector<size_t> pick_probe(const std::vector<size_t>& train, int size,
                               const Rng& root) {
  Rng rng = root.substream(kStreamProbePick);
  std::vector<size_t> probe;
  const size_t want = std::min(train.size(), static_cast<size_t>(size));
  for (size_t i = 0; i < want; ++i) {
    probe.push_back(train[rng.below(train.size())]);
  }
  return probe;
}

nlohmann::json manifest_to_json(const Manifest& m) {
  return {{"code_version", m.code_version},
          {"seed", m.seed},
          {"config_hash", m.config_hash}};
}

}  // namespace

std::string export_jsonl(const RunLog& log) {
  std::string out;
  out += nlohmann::json{{"manifest", manifest_to_json(log.manifest)}}.dump();
  out += '\n';
  for (const auto& r : log.rows) {
    out += metrics_row_to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::string export_csv(const RunLog& log) {
  std::string out = kMetricsCsvHeader;
  out += '\n';
  for (const auto& r : log.rows) {
    out += std::to_string(r.step) + ',' + format_double(r.reward_mean) + ',' +
           format_double(r.reward_std) + ',' + format_double(r.entropy) + ',' +
           format_double(r.five_acc) + ',' + format_double(r.two_acc) + ',' +
           format_double(r.macro_f1) + ',' + format_double(r.weighted_f1) +
           ',' + format_double(r.pair_acc) + ',' + format_double(r.ndcg3) +
           ',' + format_double(r.longtail_checkpoint_acc) + '\n';
  }
  return out;
}

RunLog import_jsonl(const std::string& text) {
  RunLog log;
  std::istringstream in(text);
  std::string line;
  bool have_manifest = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    if (!have_manifest) {
      const auto& m = j.at("manifest");
      log.manifest.code_version = m.at("code_version").get<std::string>();
      log.manifest.seed = m.at("seed").get<uint64_t>();
      log.manifest.config_hash = m.at("config_hash").get<std::string>();
      have_manifest = true;
      continue;
    }
    log.rows.push_back(metrics_row_from_json(j));
  }
  if (!have_manifest) throw std::invalid_argument("runlog missing manifest");
  return log;
}

std::vector<metrics::PredictionRecord> evaluate_policy(
    const policy::PolicyParams& params, const world::Dataset& ds,
    const std::vector<size_t>& indices, int eval_group_size) {
  std::vector<metrics::PredictionRecord> records;
  records.reserve(indices.size());
  for (size_t pos = 0; pos < indices.size(); ++pos) {
    const world::Instance& inst = ds.instances[indices[pos]];
    const auto dist = policy::slot_distribution(params, inst.features, 0);
    metrics::PredictionRecord r;
    r.query_id = static_cast<int>(pos / static_cast<size_t>(eval_group_size));
    r.y_true = inst.label;
    r.y_pred = static_cast<int>(
        std::max_element(dist.probs.begin(), dist.probs.end()) -
        dist.probs.begin());
    r.score = policy::weighted_expected_score(dist);
    records.push_back(r);
  }
  return records;
}

std::optional<double> longtail_checkpoint_accuracy(
    const policy::PolicyParams& params, const world::Dataset& ds,
    const std::vector<size_t>& indices) {
  size_t total = 0, hit = 0;
  for (size_t idx : indices) {
    const world::Instance& inst = ds.instances[idx];
    if (!inst.is_longtail) continue;
    ++total;
    const auto tokens = policy::argmax_tokens(params, inst.features);
    const auto truth =
        grammar::slot_tokens(world::expert_trajectory(inst));
    bool all = true;
    for (int s = 1; s <= 5; ++s) {
      if (tokens[static_cast<size_t>(s)] != truth[static_cast<size_t>(s)]) {
        all = false;
        break;
      }
    }
    if (all) ++hit;
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(hit) / static_cast<double>(total);
}

TrainResult run_training(const ExperimentConfig& cfg) {
  if (!cfg.reward.valid() || !cfg.optim.valid() || !cfg.world.valid()) {
    throw ConfigError("invalid experiment config");
  }
  for (const auto& s : cfg.stages) {
    if (!s.valid()) throw ConfigError("invalid stage spec");
  }

  TrainResult res;
  res.dataset = world::gen_dataset(cfg.n_instances, cfg.world);
  const size_t n = res.dataset.instances.size();
  const auto holdout_n = static_cast<size_t>(
      std::llround(static_cast<double>(n) * cfg.holdout_fraction));
  if (holdout_n == 0 || holdout_n >= n) {
    throw ConfigError("holdout split leaves an empty partition");
  }
  for (size_t i = 0; i < n - holdout_n; ++i) res.train_indices.push_back(i);
  for (size_t i = n - holdout_n; i < n; ++i) res.holdout_indices.push_back(i);

  const Rng root(cfg.seed);
  res.params = policy::make_policy(
      policy::afrl_layout(), policy::Capacity::teacher, cfg.world.feature_dim,
      root.substream(kStreamPolicyInit).seed(), 0.0);

  const auto probe = pick_probe(res.train_indices, cfg.probe_size, root);
  const auto mask_arr = reward::weight_mask(cfg.reward).weights;
  const std::vector<double> mask(mask_arr.begin(), mask_arr.end());

  optim::Optimizer opt(res.params);
  policy::PolicyParams ref = res.params;

  RunLog& log = res.log;
  log.manifest.seed = cfg.seed;
  log.manifest.config_hash = config::config_hash(cfg);

  const long warmup = cfg.sft_warmup_steps;
  const long num_stages = static_cast<long>(cfg.stages.size());
  const long total = warmup + num_stages * cfg.steps_per_stage;

  curriculum::BinnedDataset bins;
  bool have_bins = false;
  int last_stage = 0;
  long last_eval = -1;
  const bool needs_rollouts = cfg.mode != TrainMode::sft_only;

  const auto maybe_eval = [&](long step) {
    if (step == last_eval) return;
    log.rows.push_back(eval_suite(res.params, res.dataset,
                                  res.holdout_indices, probe, cfg, root,
                                  step));
    last_eval = step;
  };
  const auto save_params = [&](const std::string& name,
                               const policy::PolicyParams& p) {
    if (!cfg.output_dir.empty()) {
      write_text_file(cfg.output_dir, name, policy::to_json(p));
    }
  };

  maybe_eval(0);
  policy::PolicyParams last_good = res.params;

  try {
    for (long step = 1; step <= total; ++step) {
      const int stage =
          step <= warmup
              ? 0
              : 1 + static_cast<int>((step - warmup - 1) / cfg.steps_per_stage);
      if (stage != last_stage) {
        save_params("checkpoint_stage" + std::to_string(last_stage) + ".json",
                    res.params);
        if (needs_rollouts && (!have_bins || !cfg.static_binning)) {
          bins = curriculum::bin_dataset(
              res.params, res.dataset, res.train_indices, cfg.reward,
              cfg.acc_at_samples, cfg.optim.temperature,
              root.substream(kStreamBinning)
                  .substream(static_cast<uint64_t>(stage)));
          have_bins = true;
        }
        last_stage = stage;
      }

      const auto coeffs = coeffs_for(cfg.mode, stage, cfg.stages);
      last_good = res.params;

      // RL rollouts under the reference snapshot.
      std::vector<optim::GroupRollout> rollouts;
      if (coeffs.alpha_t > 0.0) {
        if ((step - warmup - 1) % cfg.optim.ref_refresh_interval == 0) {
          ref = res.params;
        }
        std::vector<size_t> batch;
        Rng batch_rng = root.substream(kStreamRlBatch)
                            .substream(static_cast<uint64_t>(step));
        if (cfg.sampling == SamplingMode::curriculum) {
          batch = curriculum::stage_batch(
              cfg.stages[static_cast<size_t>(stage - 1)], bins,
              cfg.batch_size, batch_rng);
        } else {
          // Random sampling still never trains on excluded instances.
          std::vector<size_t> pool;
          pool.reserve(bins.trainable_size());
          pool.insert(pool.end(), bins.easy.begin(), bins.easy.end());
          pool.insert(pool.end(), bins.medium.begin(), bins.medium.end());
          pool.insert(pool.end(), bins.hard.begin(), bins.hard.end());
          if (pool.empty()) {
            throw std::runtime_error("no trainable instances after binning");
          }
          std::sort(pool.begin(), pool.end());
          for (int i = 0; i < cfg.batch_size; ++i) {
            batch.push_back(pool[batch_rng.below(pool.size())]);
          }
        }
        const Rng roll_root = root.substream(kStreamRollout)
                                  .substream(static_cast<uint64_t>(step));
        rollouts.reserve(batch.size());
        for (size_t pos = 0; pos < batch.size(); ++pos) {
          const world::Instance& inst = res.dataset.instances[batch[pos]];
          optim::GroupRollout group;
          group.features = inst.features;
          Rng rng = roll_root.substream(pos);
          for (int g = 0; g < cfg.optim.group_size; ++g) {
            const auto sample = policy::sample_tokens(
                ref, inst.features, rng, cfg.optim.temperature);
            std::array<int, grammar::kNumSlots> toks{};
            std::copy(sample.tokens.begin(), sample.tokens.end(),
                      toks.begin());
            const auto text = grammar::render_trajectory(
                grammar::trajectory_from_tokens(toks));
            group.tokens.push_back(sample.tokens);
            group.rewards.push_back(
                reward::total_reward(text, inst.label, cfg.reward).total);
          }
          group.advantages =
              optim::group_advantages(group.rewards, cfg.optim.adv_epsilon);
          rollouts.push_back(std::move(group));
        }
      }

      std::vector<optim::ExpertExample> sft_batch;
      if (coeffs.gamma_t > 0.0) {
        Rng rng = root.substream(kStreamSftBatch)
                      .substream(static_cast<uint64_t>(step));
        sft_batch.reserve(static_cast<size_t>(cfg.sft_batch_size));
        for (int i = 0; i < cfg.sft_batch_size; ++i) {
          const size_t idx =
              res.train_indices[rng.below(res.train_indices.size())];
          const world::Instance& inst = res.dataset.instances[idx];
          sft_batch.push_back({inst.features, expert_tokens(inst)});
        }
      }

      const auto step_log = optim::hybrid_step(
          res.params, ref, rollouts, sft_batch, coeffs, mask, cfg.optim, opt);
      log.steps.push_back({step, stage, coeffs.alpha_t, coeffs.gamma_t,
                           step_log.loss_total, step_log.loss_rl,
                           step_log.loss_sft, step_log.kl});

      if (step % cfg.eval_interval == 0 || step == warmup || step == total) {
        maybe_eval(step);
      }
    }
  } catch (const optim::NumericError&) {
    save_params("last_good_params.json", last_good);
    throw;
  }

  save_params("checkpoint_stage" + std::to_string(last_stage) + ".json",
              res.params);
  save_params("final_params.json", res.params);
  if (!cfg.output_dir.empty()) {
    write_text_file(cfg.output_dir, "runlog.jsonl", export_jsonl(log));
    write_text_file(cfg.output_dir, "runlog.csv", export_csv(log));
    write_text_file(cfg.output_dir, "steps.csv", steps_csv(log));
    write_text_file(cfg.output_dir, "config.json",
                    config::experiment_to_json(cfg).dump(2) + "\n");
  }
  return res;
}

AblationResult run_ablation(const std::vector<ExperimentConfig>& configs) {
  if (configs.size() < 2) {
    throw ConfigError("ablation needs at least 2 configs");
  }
  const auto strip = [](const ExperimentConfig& c) {
    nlohmann::json j = config::experiment_to_json(c);
    j.erase("mode");
    j.erase("sampling");
    j.erase("output_dir");
    return j;
  };
  const nlohmann::json base = strip(configs.front());
  for (const auto& c : configs) {
    if (strip(c) != base) {
      throw ConfigError(
          "ablation configs must differ only in mode or sampling");
    }
  }

  AblationResult res;
  for (const auto& c : configs) {
    res.labels.push_back(std::string(config::to_string(c.mode)) + "/" +
                         config::to_string(c.sampling));
    res.logs.push_back(run_training(c).log);
  }

  // Side-by-side CSV; rows align because the eval schedule is shared.
  std::string csv = "step";
  const char* metric_names[] = {"reward_mean", "entropy", "five_acc",
                                "two_acc",     "macro_f1", "pair_acc",
                                "ndcg3",       "longtail_checkpoint_acc"};
  for (size_t r = 0; r < res.logs.size(); ++r) {
    for (const char* m : metric_names) {
      csv += ',' + res.labels[r] + '.' + m;
    }
  }
  csv += '\n';
  const size_t rows = res.logs.front().rows.size();
  for (size_t i = 0; i < rows; ++i) {
    csv += std::to_string(res.logs.front().rows[i].step);
    for (const auto& log : res.logs) {
      const auto& row = log.rows[i];
      const double vals[] = {row.reward_mean, row.entropy,  row.five_acc,
                             row.two_acc,     row.macro_f1, row.pair_acc,
                             row.ndcg3,       row.longtail_checkpoint_acc};
      for (double v : vals) csv += ',' + format_double(v);
    }
    csv += '\n';
  }
  res.side_by_side_csv = csv;

  nlohmann::json summary;
  // Efficiency probe: first eval step crossing 95% of pure_grpo's best
  // probe reward.
  double grpo_best = 0.0;
  bool have_grpo = false;
  for (size_t r = 0; r < res.logs.size(); ++r) {
    if (res.labels[r].starts_with("pure_grpo")) {
      for (const auto& row : res.logs[r].rows) {
        grpo_best = std::max(grpo_best, row.reward_mean);
      }
      have_grpo = true;
      break;
    }
  }
  for (size_t r = 0; r < res.logs.size(); ++r) {
    nlohmann::json entry;
    const auto& last = res.logs[r].rows.back();
    entry["final"] = metrics_row_to_json(last);
    if (have_grpo) {
      const double threshold = 0.95 * grpo_best;
      long cross = -1;
      for (const auto& row : res.logs[r].rows) {
        if (row.reward_mean >= threshold) {
          cross = row.step;
          break;
        }
      }
      entry["steps_to_95pct_of_grpo_best"] = cross;
    }
    summary[res.labels[r]] = entry;
  }
  res.summary = summary;
  return res;
}

nlohmann::json DistillReport::to_json() const {
  return {{"teacher_acc", teacher_acc},
          {"student_acc", student_acc},
          {"student_init_acc", student_init_acc},
          {"gap", gap},
          {"student_capacity", student_capacity}};
}

DistillResult run_distill(const ExperimentConfig& cfg) {
  policy::PolicyParams teacher = [&] {
    if (!cfg.distill.teacher_params_path.empty()) {
      std::ifstream in(cfg.distill.teacher_params_path);
      if (!in) {
        throw ConfigError("cannot open teacher params: " +
                          cfg.distill.teacher_params_path);
      }
      std::stringstream ss;
      ss << in.rdbuf();
      return policy::params_from_json(ss.str());
    }
    ExperimentConfig inner = cfg;
    inner.output_dir.clear();
    return run_training(inner).params;
  }();

  auto ds = world::gen_dataset(cfg.n_instances, cfg.world);
  const size_t n = ds.instances.size();
  const auto holdout_n = static_cast<size_t>(
      std::llround(static_cast<double>(n) * cfg.holdout_fraction));
  std::vector<size_t> train, holdout;
  for (size_t i = 0; i < n - holdout_n; ++i) train.push_back(i);
  for (size_t i = n - holdout_n; i < n; ++i) holdout.push_back(i);

  const auto capacity = cfg.distill.student_capacity == "teacher"
                            ? policy::Capacity::teacher
                            : policy::Capacity::student;
  auto student =
      policy::make_policy(policy::afrl_layout(), capacity,
                          cfg.world.feature_dim, cfg.distill.init_seed, 0.01);

  DistillResult res;
  res.report.student_capacity = cfg.distill.student_capacity;
  res.report.student_init_acc = metrics::five_acc(
      evaluate_policy(student, ds, holdout, cfg.eval_group_size));

  optim::OptimConfig ocfg = cfg.optim;
  ocfg.learning_rate = cfg.distill.learning_rate;
  optim::Optimizer opt(student);
  const Rng root(cfg.seed);
  const size_t num_slots = student.slots.size();

  for (int step = 1; step <= cfg.distill.steps; ++step) {
    Rng rng = root.substream(kStreamDistill)
                  .substream(static_cast<uint64_t>(step));
    std::vector<optim::DistillExample> batch;
    batch.reserve(static_cast<size_t>(cfg.distill.batch_size));
    for (int i = 0; i < cfg.distill.batch_size; ++i) {
      const size_t idx = train[rng.below(train.size())];
      const world::Instance& inst = ds.instances[idx];
      optim::DistillExample ex;
      ex.features = inst.features;
      ex.slot_targets.resize(num_slots);
      ex.slot_targets[0] =
          policy::slot_distribution(teacher, inst.features, 0).probs;
      if (cfg.distill.all_slots) {
        for (size_t s = 1; s < num_slots; ++s) {
          ex.slot_targets[s] =
              policy::slot_distribution(teacher, inst.features,
                                        static_cast<int>(s))
                  .probs;
        }
      }
      batch.push_back(std::move(ex));
    }
    const auto eval = optim::distill_loss_and_grad(student, batch);
    if (!std::isfinite(eval.loss)) {
      throw optim::NumericError("non-finite distillation loss");
    }
    opt.step(student, eval.grad, ocfg);
  }

  res.report.teacher_acc = metrics::five_acc(
      evaluate_policy(teacher, ds, holdout, cfg.eval_group_size));
  res.report.student_acc = metrics::five_acc(
      evaluate_policy(student, ds, holdout, cfg.eval_group_size));
  res.report.gap = res.report.teacher_acc - res.report.student_acc;
  res.student = std::move(student);

  if (!cfg.output_dir.empty()) {
    write_text_file(cfg.output_dir, "student_params.json",
                    policy::to_json(res.student));
    write_text_file(cfg.output_dir, "distill_report.json",
                    res.report.to_json().dump(2) + "\n");
  }
  return res;
}

KlLabResult run_kl_lab() {
  KlLabResult res;
  Rng rng(20260809);

  double max_sft = 0.0;
  double max_rl = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const size_t n = 2 + rng.below(49);
    const auto p = kl_lab::random_categorical(n, rng);
    const auto q = kl_lab::random_categorical(n, rng);
    max_sft = std::max(max_sft, std::abs(kl_lab::verify_sft_identity(p, q)));
    kl_lab::GibbsSpec spec;
    spec.rewards.resize(n);
    for (double& r : spec.rewards) r = rng.uniform(-2.0, 2.0);
    spec.gibbs_temperature = rng.uniform(0.1, 3.0);
    max_rl = std::max(max_rl, std::abs(kl_lab::verify_rl_identity(q, spec)));
  }

  bool gibbs_ok = true;
  for (int i = 0; i < 100 && gibbs_ok; ++i) {
    const size_t n = 2 + rng.below(19);
    kl_lab::GibbsSpec spec;
    spec.rewards.resize(n);
    for (double& r : spec.rewards) r = rng.uniform(-2.0, 2.0);
    spec.gibbs_temperature = rng.uniform(0.2, 2.0);
    const auto pi_star = kl_lab::gibbs_policy(spec);
    if (kl_lab::reverse_kl(pi_star, pi_star) != 0.0) gibbs_ok = false;
    const auto q = kl_lab::random_categorical(n, rng);
    if (!(kl_lab::reverse_kl(q, pi_star) > 0.0)) gibbs_ok = false;
  }

  const auto target = kl_lab::bimodal_target();
  const kl_lab::FitFamily family;
  std::string csv = "seed,direction,step,divergence,location,width\n";
  auto masses = nlohmann::json::array();
  bool forward_ok = true, reverse_ok = true;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    for (const auto dir :
         {kl_lab::FitDirection::forward, kl_lab::FitDirection::reverse}) {
      const auto fit =
          kl_lab::fit_divergence(target, family, dir, 400, 40.0, seed);
      const char* name =
          dir == kl_lab::FitDirection::forward ? "forward" : "reverse";
      for (const auto& t : fit.trace) {
        csv += std::to_string(seed) + ',' + name + ',' +
               std::to_string(t.step) + ',' + format_double(t.divergence) +
               ',' + format_double(t.location) + ',' +
               format_double(t.width) + '\n';
      }
      masses.push_back({{"seed", seed},
                        {"direction", name},
                        {"mode_mass_low", fit.mode_mass_low},
                        {"mode_mass_high", fit.mode_mass_high}});
      const double minor = std::min(fit.mode_mass_low, fit.mode_mass_high);
      if (dir == kl_lab::FitDirection::forward) {
        if (minor < 0.20) forward_ok = false;
      } else {
        if (!(minor < 0.05)) reverse_ok = false;
      }
    }
  }

  res.report = {{"sft_identity_max_residual", max_sft},
                {"rl_identity_max_residual", max_rl},
                {"identity_instances", 1000},
                {"gibbs_optimality_ok", gibbs_ok},
                {"mode_masses", masses},
                {"forward_covers_both_modes", forward_ok},
                {"reverse_collapses_minor_mode", reverse_ok}};
  res.traces_csv = csv;
  return res;
}

}  // namespace afrlab::runner
