#include "config.hpp"

#include <fstream>
#include <sstream>

namespace afrlab::config {

namespace {

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("bad value for '") + key + "': " +
                        e.what());
    }
  }
}

world::WorldConfig world_from_json(const nlohmann::json& j) {
  world::WorldConfig w;
  read_field(j, "feature_dim", w.feature_dim);
  read_field(j, "longtail_rate", w.longtail_rate);
  read_field(j, "shortcut_strength", w.shortcut_strength);
  read_field(j, "seed", w.seed);
  if (!w.valid()) throw ConfigError("invalid world config");
  return w;
}

reward::RewardConfig reward_from_json(const nlohmann::json& j) {
  reward::RewardConfig r;
  read_field(j, "alpha", r.alpha);
  read_field(j, "beta", r.beta);
  read_field(j, "gamma_ord", r.gamma_ord);
  read_field(j, "format_penalty", r.format_penalty);
  read_field(j, "w_decision", r.w_decision);
  read_field(j, "w_trace", r.w_trace);
  read_field(j, "w_final", r.w_final);
  if (!r.valid()) {
    throw ConfigError("invalid reward config (alpha+beta must be 1, "
                      "gamma_ord >= 0, weights > 0)");
  }
  return r;
}

optim::OptimConfig optim_from_json(const nlohmann::json& j) {
  optim::OptimConfig o;
  read_field(j, "clip_ratio", o.clip_ratio);
  read_field(j, "kl_coeff", o.kl_coeff);
  read_field(j, "learning_rate", o.learning_rate);
  read_field(j, "group_size", o.group_size);
  read_field(j, "adv_epsilon", o.adv_epsilon);
  read_field(j, "temperature", o.temperature);
  read_field(j, "ref_refresh_interval", o.ref_refresh_interval);
  read_field(j, "adam_beta1", o.adam_beta1);
  read_field(j, "adam_beta2", o.adam_beta2);
  read_field(j, "adam_eps", o.adam_eps);
  if (j.contains("optimizer")) {
    const auto s = j.at("optimizer").get<std::string>();
    if (s == "sgd") {
      o.optimizer = optim::OptimizerKind::sgd;
    } else if (s == "adam") {
      o.optimizer = optim::OptimizerKind::adam;
    } else {
      throw ConfigError("unknown optimizer: " + s);
    }
  }
  if (!o.valid()) throw ConfigError("invalid optim config");
  return o;
}

curriculum::StageSpec stage_from_json(const nlohmann::json& j, int index) {
  curriculum::StageSpec s;
  s.stage = index + 1;
  read_field(j, "stage", s.stage);
  if (j.contains("mix")) {
    const auto& m = j.at("mix");
    read_field(m, "easy", s.easy_ratio);
    read_field(m, "medium", s.medium_ratio);
    read_field(m, "hard", s.hard_ratio);
  }
  if (j.contains("coeffs")) {
    const auto& c = j.at("coeffs");
    read_field(c, "alpha_t", s.coeffs.alpha_t);
    read_field(c, "gamma_t", s.coeffs.gamma_t);
  }
  if (!s.valid()) {
    throw ConfigError("invalid stage spec at index " + std::to_string(index));
  }
  return s;
}

nlohmann::json stage_to_json(const curriculum::StageSpec& s) {
  return {{"stage", s.stage},
          {"mix",
           {{"easy", s.easy_ratio},
            {"medium", s.medium_ratio},
            {"hard", s.hard_ratio}}},
          {"coeffs",
           {{"alpha_t", s.coeffs.alpha_t}, {"gamma_t", s.coeffs.gamma_t}}}};
}

}  // namespace

const char* to_string(TrainMode m) {
  switch (m) {
    case TrainMode::mode_balanced: return "mode_balanced";
    case TrainMode::pure_grpo: return "pure_grpo";
    case TrainMode::sft_only: return "sft_only";
  }
  return "?";
}

const char* to_string(SamplingMode m) {
  return m == SamplingMode::curriculum ? "curriculum" : "random";
}

TrainMode train_mode_from_string(const std::string& s) {
  if (s == "mode_balanced") return TrainMode::mode_balanced;
  if (s == "pure_grpo") return TrainMode::pure_grpo;
  if (s == "sft_only") return TrainMode::sft_only;
  throw ConfigError("unknown mode: " + s);
}

SamplingMode sampling_mode_from_string(const std::string& s) {
  if (s == "curriculum") return SamplingMode::curriculum;
  if (s == "random") return SamplingMode::random;
  throw ConfigError("unknown sampling: " + s);
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  if (j.contains("world")) cfg.world = world_from_json(j.at("world"));
  if (j.contains("reward")) cfg.reward = reward_from_json(j.at("reward"));
  if (j.contains("optim")) cfg.optim = optim_from_json(j.at("optim"));
  if (j.contains("stages")) {
    cfg.stages.clear();
    int i = 0;
    for (const auto& js : j.at("stages")) {
      cfg.stages.push_back(stage_from_json(js, i++));
    }
    if (cfg.stages.empty()) throw ConfigError("stages must not be empty");
  }
  read_field(j, "steps_per_stage", cfg.steps_per_stage);
  read_field(j, "sft_warmup_steps", cfg.sft_warmup_steps);
  if (j.contains("mode")) {
    cfg.mode = train_mode_from_string(j.at("mode").get<std::string>());
  }
  if (j.contains("sampling")) {
    cfg.sampling =
        sampling_mode_from_string(j.at("sampling").get<std::string>());
  }
  read_field(j, "n_instances", cfg.n_instances);
  read_field(j, "holdout_fraction", cfg.holdout_fraction);
  read_field(j, "batch_size", cfg.batch_size);
  read_field(j, "sft_batch_size", cfg.sft_batch_size);
  read_field(j, "eval_interval", cfg.eval_interval);
  read_field(j, "eval_group_size", cfg.eval_group_size);
  read_field(j, "probe_size", cfg.probe_size);
  read_field(j, "acc_at_samples", cfg.acc_at_samples);
  read_field(j, "static_binning", cfg.static_binning);
  read_field(j, "seed", cfg.seed);
  read_field(j, "output_dir", cfg.output_dir);
  read_field(j, "deterministic", cfg.deterministic);
  if (j.contains("distill")) {
    const auto& d = j.at("distill");
    read_field(d, "teacher_params_path", cfg.distill.teacher_params_path);
    read_field(d, "student_capacity", cfg.distill.student_capacity);
    read_field(d, "steps", cfg.distill.steps);
    read_field(d, "batch_size", cfg.distill.batch_size);
    read_field(d, "learning_rate", cfg.distill.learning_rate);
    read_field(d, "all_slots", cfg.distill.all_slots);
    read_field(d, "init_seed", cfg.distill.init_seed);
    if (cfg.distill.student_capacity != "student" &&
        cfg.distill.student_capacity != "teacher") {
      throw ConfigError("distill.student_capacity must be student or teacher");
    }
  }
  if (cfg.steps_per_stage < 0 || cfg.sft_warmup_steps < 0) {
    throw ConfigError("step counts must be >= 0");
  }
  if (cfg.n_instances < 10) throw ConfigError("n_instances must be >= 10");
  if (cfg.holdout_fraction <= 0.0 || cfg.holdout_fraction >= 1.0) {
    throw ConfigError("holdout_fraction must be in (0,1)");
  }
  if (cfg.batch_size < 1 || cfg.sft_batch_size < 1 || cfg.eval_interval < 1 ||
      cfg.eval_group_size < 2 || cfg.probe_size < 1 ||
      cfg.acc_at_samples < 1) {
    throw ConfigError("batch/eval sizes must be positive");
  }
  return cfg;
}

nlohmann::json experiment_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["world"] = {{"feature_dim", cfg.world.feature_dim},
                {"longtail_rate", cfg.world.longtail_rate},
                {"shortcut_strength", cfg.world.shortcut_strength},
                {"seed", cfg.world.seed}};
  j["reward"] = {{"alpha", cfg.reward.alpha},
                 {"beta", cfg.reward.beta},
                 {"gamma_ord", cfg.reward.gamma_ord},
                 {"format_penalty", cfg.reward.format_penalty},
                 {"w_decision", cfg.reward.w_decision},
                 {"w_trace", cfg.reward.w_trace},
                 {"w_final", cfg.reward.w_final}};
  j["optim"] = {
      {"clip_ratio", cfg.optim.clip_ratio},
      {"kl_coeff", cfg.optim.kl_coeff},
      {"learning_rate", cfg.optim.learning_rate},
      {"group_size", cfg.optim.group_size},
      {"adv_epsilon", cfg.optim.adv_epsilon},
      {"temperature", cfg.optim.temperature},
      {"ref_refresh_interval", cfg.optim.ref_refresh_interval},
      {"adam_beta1", cfg.optim.adam_beta1},
      {"adam_beta2", cfg.optim.adam_beta2},
      {"adam_eps", cfg.optim.adam_eps},
      {"optimizer",
       cfg.optim.optimizer == optim::OptimizerKind::sgd ? "sgd" : "adam"}};
  auto stages = nlohmann::json::array();
  for (const auto& s : cfg.stages) stages.push_back(stage_to_json(s));
  j["stages"] = stages;
  j["steps_per_stage"] = cfg.steps_per_stage;
  j["sft_warmup_steps"] = cfg.sft_warmup_steps;
  j["mode"] = to_string(cfg.mode);
  j["sampling"] = to_string(cfg.sampling);
  j["n_instances"] = cfg.n_instances;
  j["holdout_fraction"] = cfg.holdout_fraction;
  j["batch_size"] = cfg.batch_size;
  j["sft_batch_size"] = cfg.sft_batch_size;
  j["eval_interval"] = cfg.eval_interval;
  j["eval_group_size"] = cfg.eval_group_size;
  j["probe_size"] = cfg.probe_size;
  j["acc_at_samples"] = cfg.acc_at_samples;
  j["static_binning"] = cfg.static_binning;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  j["deterministic"] = cfg.deterministic;
  j["distill"] = {{"teacher_params_path", cfg.distill.teacher_params_path},
                  {"student_capacity", cfg.distill.student_capacity},
                  {"steps", cfg.distill.steps},
                  {"batch_size", cfg.distill.batch_size},
                  {"learning_rate", cfg.distill.learning_rate},
                  {"all_slots", cfg.distill.all_slots},
                  {"init_seed", cfg.distill.init_seed}};
  return j;
}

nlohmann::json load_json(const std::string& source) {
  try {
    if (!source.empty() && source.front() == '{') {
      return nlohmann::json::parse(source);
    }
    std::ifstream in(source);
    if (!in) throw ConfigError("cannot open config file: " + source);
    std::stringstream ss;
    ss << in.rdbuf();
    return nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config JSON: ") + e.what());
  }
}

ExperimentConfig load_experiment(const std::string& source) {
  return experiment_from_json(load_json(source));
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string dump = experiment_to_json(cfg).dump();
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace afrlab::config
