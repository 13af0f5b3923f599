// afrlab command-line driver. Talks to the core exclusively through the
// C API in afrlab.h; argument parsing and config munging are local.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "afrlab.h"

namespace {

// Exit codes: 0 success, 2 config error, 3 numeric abort.
int exit_code_for(int status) {
  if (status == AFRLAB_OK) return 0;
  if (status == AFRLAB_ERR_NUMERIC) return 3;
  return 2;
}

int report(int status) {
  if (status != AFRLAB_OK) {
    std::fprintf(stderr, "afrlab: error (%d): %s\n", status,
                 afrlab_last_error());
  }
  return exit_code_for(status);
}

// Resolves --config to an inline JSON string, applying --deterministic.
// Returns empty string and sets ok=false when the source is unreadable.
std::string resolve_config(const std::string& source, bool deterministic,
                           bool& ok) {
  ok = true;
  std::string text = source;
  if (text.empty()) {
    text = "{}";
  } else if (text.front() != '{') {
    std::ifstream in(text);
    if (!in) {
      std::fprintf(stderr, "afrlab: cannot open config file: %s\n",
                   text.c_str());
      ok = false;
      return "";
    }
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  if (!deterministic) return text;
  try {
    nlohmann::json j = nlohmann::json::parse(text);
    j["deterministic"] = true;
    return j.dump();
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "afrlab: malformed config JSON: %s\n", e.what());
    ok = false;
    return "";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"afrlab: mode-balanced stepwise-GRPO relevance lab"};
  app.set_version_flag("--version", afrlab_version());
  app.require_subcommand(1);

  std::string config;
  bool deterministic = false;
  app.add_option("--config", config, "experiment config (JSON file or inline)")
      ->configurable(false);
  app.add_flag("--deterministic", deterministic,
               "force deterministic single-threaded execution");

  auto* gen = app.add_subcommand("gen-data", "generate a dataset JSONL");
  std::string gen_out = "dataset.jsonl";
  gen->add_option("--out", gen_out, "output JSONL path");

  auto* train = app.add_subcommand("train", "run the training protocol");
  std::string train_out;
  train->add_option("--out", train_out, "output directory (overrides config)");

  auto* eval = app.add_subcommand("eval", "evaluate prediction records");
  std::string eval_in, eval_out = "metrics.json", eval_csv;
  eval->add_option("--input", eval_in, "prediction JSONL path")->required();
  eval->add_option("--out", eval_out, "metrics JSON output path");
  eval->add_option("--per-class-csv", eval_csv, "per-class P/R/F1 CSV path");

  auto* ablate = app.add_subcommand("ablate", "run an ablation matrix");
  std::string ablate_out;
  ablate->add_option("--out", ablate_out,
                     "output directory (overrides config)");

  auto* distill = app.add_subcommand("distill", "teacher-to-student transfer");
  std::string distill_out;
  distill->add_option("--out", distill_out,
                      "output directory (overrides config)");

  auto* kllab = app.add_subcommand("kl-lab", "verify the KL identities");
  std::string kl_report = "kl_report.json", kl_traces;
  kllab->add_option("--report", kl_report, "report JSON path");
  kllab->add_option("--traces", kl_traces, "fit-trace CSV path");

  CLI11_PARSE(app, argc, argv);

  bool ok = true;
  const std::string cfg = resolve_config(config, deterministic, ok);
  if (!ok) return 2;

  if (gen->parsed()) {
    return report(afrlab_gen_data(cfg.c_str(), gen_out.c_str()));
  }
  if (train->parsed()) {
    return report(afrlab_train(cfg.c_str(), train_out.c_str()));
  }
  if (eval->parsed()) {
    return report(afrlab_eval_file(
        eval_in.c_str(), eval_out.c_str(),
        eval_csv.empty() ? nullptr : eval_csv.c_str()));
  }
  if (ablate->parsed()) {
    return report(afrlab_ablate(cfg.c_str(), ablate_out.c_str()));
  }
  if (distill->parsed()) {
    return report(afrlab_distill(cfg.c_str(), distill_out.c_str()));
  }
  if (kllab->parsed()) {
    return report(afrlab_kl_lab(
        kl_report.c_str(), kl_traces.empty() ? nullptr : kl_traces.c_str()));
  }
  return 2;
}
