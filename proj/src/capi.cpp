#include "afrlab.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "config.hpp"
#include "grammar.hpp"
#include "metrics.hpp"
#include "optim.hpp"
#include "policy.hpp"
#include "reward.hpp"
#include "runner.hpp"
#include "world.hpp"

#include "json.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

int fail(int code, const std::string& msg) {
  set_error(msg);
  return code;
}

int copy_out(const std::string& s, char* out, size_t cap) {
  if (out == nullptr) return fail(AFRLAB_ERR_INVALID, "null output buffer");
  if (s.size() + 1 > cap) {
    return fail(AFRLAB_ERR_BUFFER,
                "output buffer too small; need " +
                    std::to_string(s.size() + 1) + " bytes");
  }
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return AFRLAB_OK;
}

void write_file(const std::string& path, const std::string& content) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write " + path);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/* Uniform exception-to-status mapping for all entry points. */
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    set_error("");
    return fn();
  } catch (const afrlab::config::ConfigError& e) {
    return fail(AFRLAB_ERR_CONFIG, e.what());
  } catch (const afrlab::optim::NumericError& e) {
    return fail(AFRLAB_ERR_NUMERIC, e.what());
  } catch (const std::ios_base::failure& e) {
    return fail(AFRLAB_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(AFRLAB_ERR_INVALID, e.what());
  }
}

std::string sanitize(const std::string& label) {
  std::string out = label;
  for (char& c : out) {
    if (c == '/') c = '_';
  }
  return out;
}

}  // namespace

extern "C" {

struct afrlab_policy {
  afrlab::policy::PolicyParams params;
};

const char* afrlab_version(void) { return afrlab::runner::kCodeVersion; }

const char* afrlab_last_error(void) { return g_last_error.c_str(); }

int afrlab_gen_data(const char* config_json, const char* out_jsonl) {
  return guarded([&]() {
    if (config_json == nullptr || out_jsonl == nullptr) {
      return fail(AFRLAB_ERR_INVALID, "null argument");
    }
    const auto cfg = afrlab::config::load_experiment(config_json);
    const auto ds = afrlab::world::gen_dataset(cfg.n_instances, cfg.world);
    std::ostringstream ss;
    afrlab::world::write_jsonl(ds, ss);
    write_file(out_jsonl, ss.str());
    return AFRLAB_OK;
  });
}

int afrlab_train(const char* config_json, const char* out_dir) {
  return guarded([&]() {
    if (config_json == nullptr) {
      return fail(AFRLAB_ERR_INVALID, "null config");
    }
    auto cfg = afrlab::config::load_experiment(config_json);
    if (out_dir != nullptr && out_dir[0] != '\0') cfg.output_dir = out_dir;
    if (cfg.output_dir.empty()) {
      return fail(AFRLAB_ERR_CONFIG, "train needs an output directory");
    }
    afrlab::runner::run_training(cfg);
    return AFRLAB_OK;
  });
}

int afrlab_ablate(const char* config_json, const char* out_dir) {
  return guarded([&]() {
    if (config_json == nullptr) {
      return fail(AFRLAB_ERR_INVALID, "null config");
    }
    const auto j = afrlab::config::load_json(config_json);
    auto base = afrlab::config::experiment_from_json(j);
    if (out_dir != nullptr && out_dir[0] != '\0') base.output_dir = out_dir;
    if (base.output_dir.empty()) {
      return fail(AFRLAB_ERR_CONFIG, "ablate needs an output directory");
    }
    const std::string dir = base.output_dir;

    nlohmann::json arms = nlohmann::json::array(
        {{{"mode", "pure_grpo"}}, {{"mode", "mode_balanced"}}});
    if (j.contains("ablate")) arms = j.at("ablate");
    std::vector<afrlab::config::ExperimentConfig> configs;
    for (const auto& arm : arms) {
      auto cfg = base;
      cfg.output_dir.clear();
      if (arm.contains("mode")) {
        cfg.mode = afrlab::config::train_mode_from_string(
            arm.at("mode").get<std::string>());
      }
      if (arm.contains("sampling")) {
        cfg.sampling = afrlab::config::sampling_mode_from_string(
            arm.at("sampling").get<std::string>());
      }
      configs.push_back(std::move(cfg));
    }
    const auto res = afrlab::runner::run_ablation(configs);
    write_file(dir + "/ablation.csv", res.side_by_side_csv);
    write_file(dir + "/ablation_summary.json", res.summary.dump(2) + "\n");
    for (size_t i = 0; i < res.logs.size(); ++i) {
      write_file(dir + "/runlog_" + sanitize(res.labels[i]) + ".jsonl",
                 afrlab::runner::export_jsonl(res.logs[i]));
    }
    return AFRLAB_OK;
  });
}

int afrlab_distill(const char* config_json, const char* out_dir) {
  return guarded([&]() {
    if (config_json == nullptr) {
      return fail(AFRLAB_ERR_INVALID, "null config");
    }
    auto cfg = afrlab::config::load_experiment(config_json);
    if (out_dir != nullptr && out_dir[0] != '\0') cfg.output_dir = out_dir;
    if (cfg.output_dir.empty()) {
      return fail(AFRLAB_ERR_CONFIG, "distill needs an output directory");
    }
    afrlab::runner::run_distill(cfg);
    return AFRLAB_OK;
  });
}

int afrlab_kl_lab(const char* report_json_path, const char* traces_csv_path) {
  return guarded([&]() {
    if (report_json_path == nullptr) {
      return fail(AFRLAB_ERR_INVALID, "null report path");
    }
    const auto res = afrlab::runner::run_kl_lab();
    write_file(report_json_path, res.report.dump(2) + "\n");
    if (traces_csv_path != nullptr) {
      write_file(traces_csv_path, res.traces_csv);
    }
    return AFRLAB_OK;
  });
}

int afrlab_eval_file(const char* predictions_jsonl,
                     const char* metrics_json_path,
                     const char* per_class_csv_path) {
  return guarded([&]() {
    if (predictions_jsonl == nullptr || metrics_json_path == nullptr) {
      return fail(AFRLAB_ERR_INVALID, "null argument");
    }
    std::ifstream in(predictions_jsonl);
    if (!in) {
      return fail(AFRLAB_ERR_IO,
                  std::string("cannot read ") + predictions_jsonl);
    }
    const auto records = afrlab::metrics::read_jsonl(in);
    if (records.empty()) {
      return fail(AFRLAB_ERR_INVALID, "no prediction records");
    }
    const auto prf = afrlab::metrics::per_class_prf(records);
    nlohmann::json out;
    out["count"] = records.size();
    out["five_acc"] = afrlab::metrics::five_acc(records);
    out["two_acc"] = afrlab::metrics::two_acc(records);
    out["macro_f1"] = prf.macro_f1;
    out["weighted_f1"] = prf.weighted_f1;
    const auto pacc = afrlab::metrics::pair_acc(records);
    out["pair_acc"] = pacc ? nlohmann::json(*pacc) : nlohmann::json(nullptr);
    const auto ndcg = afrlab::metrics::ndcg_at_k(records, 3);
    out["ndcg3"] = ndcg ? nlohmann::json(*ndcg) : nlohmann::json(nullptr);
    auto per_class = nlohmann::json::array();
    for (size_t c = 0; c < 5; ++c) {
      const auto& s = prf.per_class[c];
      per_class.push_back({{"label", c},
                           {"precision", s.precision},
                           {"recall", s.recall},
                           {"f1", s.f1},
                           {"support", s.support}});
    }
    out["per_class"] = per_class;
    write_file(metrics_json_path, out.dump(2) + "\n");
    if (per_class_csv_path != nullptr) {
      write_file(per_class_csv_path, afrlab::metrics::per_class_csv(prf));
    }
    return AFRLAB_OK;
  });
}

int afrlab_render_trajectory(int y_dec, const int checkpoints[5], int y_final,
                             char* out_text, size_t out_cap) {
  return guarded([&]() {
    if (checkpoints == nullptr) {
      return fail(AFRLAB_ERR_INVALID, "null checkpoints");
    }
    std::array<int, afrlab::grammar::kNumSlots> tokens{};
    tokens[0] = y_dec;
    for (int i = 0; i < 5; ++i) tokens[1 + i] = checkpoints[i];
    tokens[6] = y_final;
    const auto t = afrlab::grammar::trajectory_from_tokens(tokens);
    return copy_out(afrlab::grammar::render_trajectory(t), out_text, out_cap);
  });
}

int afrlab_parse_trajectory(const char* text, char* out_json, size_t out_cap) {
  return guarded([&]() {
    if (text == nullptr) return fail(AFRLAB_ERR_INVALID, "null text");
    const auto parsed = afrlab::grammar::parse_trajectory(text);
    nlohmann::json j;
    if (std::holds_alternative<afrlab::grammar::Trajectory>(parsed)) {
      const auto& t = std::get<afrlab::grammar::Trajectory>(parsed);
      const auto tokens = afrlab::grammar::slot_tokens(t);
      j["y_dec"] = t.y_dec;
      j["checkpoints"] = {tokens[1], tokens[2], tokens[3], tokens[4],
                          tokens[5]};
      j["y_final"] = t.y_final;
    } else {
      j["error"] = std::get<afrlab::grammar::FormatError>(parsed).code();
    }
    return copy_out(j.dump(), out_json, out_cap);
  });
}

int afrlab_score_trajectory(const char* text, int y_gt,
                            const char* reward_config_json, char* out_json,
                            size_t out_cap) {
  return guarded([&]() {
    if (text == nullptr) return fail(AFRLAB_ERR_INVALID, "null text");
    if (y_gt < 0 || y_gt > 4) {
      return fail(AFRLAB_ERR_INVALID, "y_gt out of the 0..4 range");
    }
    afrlab::reward::RewardConfig rcfg;
    if (reward_config_json != nullptr && reward_config_json[0] != '\0') {
      nlohmann::json wrapper;
      wrapper["reward"] = afrlab::config::load_json(reward_config_json);
      rcfg = afrlab::config::experiment_from_json(wrapper).reward;
    }
    const auto breakdown = afrlab::reward::total_reward(text, y_gt, rcfg);
    return copy_out(breakdown.to_jsonl(), out_json, out_cap);
  });
}

int afrlab_policy_load(const char* path, afrlab_policy** out) {
  return guarded([&]() {
    if (path == nullptr || out == nullptr) {
      return fail(AFRLAB_ERR_INVALID, "null argument");
    }
    auto params = afrlab::policy::params_from_json(read_file(path));
    *out = new afrlab_policy{std::move(params)};
    return AFRLAB_OK;
  });
}

int afrlab_policy_save(const afrlab_policy* policy, const char* path) {
  return guarded([&]() {
    if (policy == nullptr || path == nullptr) {
      return fail(AFRLAB_ERR_INVALID, "null argument");
    }
    write_file(path, afrlab::policy::to_json(policy->params));
    return AFRLAB_OK;
  });
}

void afrlab_policy_free(afrlab_policy* policy) { delete policy; }

int afrlab_policy_decision(const afrlab_policy* policy, const double* features,
                           size_t feature_dim, double out_probs[5],
                           double* out_score) {
  return guarded([&]() {
    if (policy == nullptr || features == nullptr || out_probs == nullptr) {
      return fail(AFRLAB_ERR_INVALID, "null argument");
    }
    const std::span<const double> f(features, feature_dim);
    const auto dist = afrlab::policy::slot_distribution(policy->params, f, 0);
    for (size_t k = 0; k < 5; ++k) out_probs[k] = dist.probs[k];
    if (out_score != nullptr) {
      *out_score = afrlab::policy::weighted_expected_score(dist);
    }
    return AFRLAB_OK;
  });
}

int afrlab_policy_greedy(const afrlab_policy* policy, const double* features,
                         size_t feature_dim, int out_tokens[7]) {
  return guarded([&]() {
    if (policy == nullptr || features == nullptr || out_tokens == nullptr) {
      return fail(AFRLAB_ERR_INVALID, "null argument");
    }
    const std::span<const double> f(features, feature_dim);
    const auto tokens = afrlab::policy::argmax_tokens(policy->params, f);
    if (tokens.size() != 7) {
      return fail(AFRLAB_ERR_INVALID, "policy is not a 7-slot policy");
    }
    for (size_t s = 0; s < 7; ++s) out_tokens[s] = tokens[s];
    return AFRLAB_OK;
  });
}

}  // extern "C"
