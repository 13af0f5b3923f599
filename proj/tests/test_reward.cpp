#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "grammar.hpp"
#include "json.hpp"
#include "reward.hpp"

using namespace afrlab;
using grammar::CheckpointAnswer;
using grammar::Trajectory;

namespace {

constexpr CheckpointAnswer Y = CheckpointAnswer::Yes;
constexpr CheckpointAnswer N = CheckpointAnswer::No;

Trajectory make_traj(int y_dec, std::array<CheckpointAnswer, 5> c,
                     int y_final) {
  return Trajectory{y_dec, c, y_final};
}

Trajectory figure_trajectory() { return make_traj(3, {N, N, Y, Y, N}, 3); }

}  // namespace

TEST_CASE("consistency gate") {
  CHECK(reward::consistency_gate(figure_trajectory()) == 1);
  CHECK(reward::consistency_gate(make_traj(2, {N, N, Y, N, N}, 3)) == 0);
  CHECK(reward::consistency_gate(make_traj(0, {Y, N, N, N, N}, 0)) == 1);
}

TEST_CASE("label inference decision tree") {
  CHECK(reward::infer_label({N, N, Y, Y, N}) == 3);  // the worked example
  CHECK(reward::infer_label({Y, N, N, N, N}) == 0);
  CHECK(reward::infer_label({N, N, Y, Y, Y}) == 4);
  CHECK(reward::infer_label({N, Y, N, N, N}) == 1);
  CHECK(reward::infer_label({N, N, N, N, N}) == 1);  // not even strong
  CHECK(reward::infer_label({N, N, Y, N, N}) == 2);
  // Irrelevant dominates everything else.
  CHECK(reward::infer_label({Y, Y, Y, Y, Y}) == 0);
  // Official without premium is ignored by the tree.
  CHECK(reward::infer_label({N, N, Y, N, Y}) == 2);
}

TEST_CASE("label inference is total and deterministic over all patterns") {
  for (int bits = 0; bits < 32; ++bits) {
    std::array<CheckpointAnswer, 5> c;
    for (int i = 0; i < 5; ++i) c[i] = (bits >> i) & 1 ? Y : N;
    const int first = reward::infer_label(c);
    CHECK(first == reward::infer_label(c));
    CHECK(first >= 0);
    CHECK(first <= 4);
  }
}

TEST_CASE("logic circuit breaker") {
  const reward::RewardConfig cfg;
  SUBCASE("passes when inferred, predicted and ground truth agree") {
    const auto [gate, y_hat] = reward::logic_gate(figure_trajectory(), 3);
    CHECK(gate == 1);
    CHECK(y_hat == 3);
  }
  SUBCASE("wrong ground truth trips it") {
    const auto [gate, y_hat] = reward::logic_gate(figure_trajectory(), 2);
    CHECK(gate == 0);
    CHECK(y_hat == 3);
  }
  SUBCASE("prediction disagreeing with the trace trips it") {
    const auto t = make_traj(2, {N, N, Y, Y, N}, 2);  // trace implies 3
    const auto [gate, y_hat] = reward::logic_gate(t, 3);
    CHECK(gate == 0);
    CHECK(y_hat == 3);
  }
}

TEST_CASE("ordinal result reward") {
  const reward::RewardConfig cfg;  // gamma_ord 0.25
  CHECK(reward::ordinal_result_reward(2, 2, cfg) == doctest::Approx(1.0));
  CHECK(reward::ordinal_result_reward(1, 3, cfg) == doctest::Approx(-0.5));
  CHECK(reward::ordinal_result_reward(0, 4, cfg) == doctest::Approx(-1.0));
}

TEST_CASE("ordinal reward matches the distance formula on all 25 pairs") {
  const reward::RewardConfig cfg;
  for (int pred = 0; pred <= 4; ++pred) {
    for (int gt = 0; gt <= 4; ++gt) {
      const double expect =
          pred == gt ? 1.0 : -cfg.gamma_ord * std::abs(pred - gt);
      CHECK(reward::ordinal_result_reward(pred, gt, cfg) ==
            doctest::Approx(expect).epsilon(0.0));
    }
  }
}

TEST_CASE("ordinal penalty is non-increasing in distance") {
  const reward::RewardConfig cfg;
  for (int gt = 0; gt <= 4; ++gt) {
    double prev = 2.0;
    for (int dist = 0; dist <= 4; ++dist) {
      const int pred = gt + dist <= 4 ? gt + dist : gt - dist;
      if (pred < 0 || pred > 4) continue;
      const double r = reward::ordinal_result_reward(pred, gt, cfg);
      CHECK(r <= prev);
      prev = r;
    }
  }
}

TEST_CASE("total reward on the worked example") {
  const reward::RewardConfig cfg;
  const auto text = grammar::render_trajectory(figure_trajectory());

  SUBCASE("all gates open yields exactly 1.0") {
    const auto b = reward::total_reward(text, 3, cfg);
    CHECK(b.i_fmt == 1);
    CHECK(b.i_cst == 1);
    CHECK(b.i_logic == 1);
    REQUIRE(b.y_hat.has_value());
    CHECK(*b.y_hat == 3);
    CHECK(b.r_res == 1.0);
    CHECK(b.r_cot == 1.0);
    CHECK(b.total == 1.0);  // 0.72 * 1 + 0.28 * 1, exact in doubles
  }
  SUBCASE("malformed text earns the format penalty") {
    const auto b = reward::total_reward("not a trajectory", 3, cfg);
    CHECK(b.i_fmt == 0);
    CHECK(b.i_cst == 0);
    CHECK(b.i_logic == 0);
    CHECK(!b.y_hat.has_value());
    CHECK(b.total == -1.0);
  }
  SUBCASE("logic gate zeroes an internally consistent wrong answer") {
    const auto b = reward::total_reward(text, 2, cfg);
    CHECK(b.i_fmt == 1);
    CHECK(b.i_cst == 1);
    CHECK(b.i_logic == 0);
    CHECK(b.total == 0.0);
  }
}

TEST_CASE("gating soundness, brute force over all 4000 combinations") {
  const reward::RewardConfig cfg;
  double max_total = -10.0;
  int positive = 0;
  for (int y_dec = 0; y_dec <= 4; ++y_dec) {
    for (int bits = 0; bits < 32; ++bits) {
      std::array<CheckpointAnswer, 5> c;
      for (int i = 0; i < 5; ++i) c[i] = (bits >> i) & 1 ? Y : N;
      for (int y_final = 0; y_final <= 4; ++y_final) {
        const auto text =
            grammar::render_trajectory(make_traj(y_dec, c, y_final));
        for (int y_gt = 0; y_gt <= 4; ++y_gt) {
          const auto b = reward::total_reward(text, y_gt, cfg);
          // Independent gate predicate, straight from the definitions.
          const int y_hat = reward::infer_label(c);
          const bool gates_pass =
              y_dec == y_final && y_hat == y_dec && y_hat == y_gt;
          if (b.total > 0.0) {
            CHECK(b.i_fmt == 1);
            CHECK(b.i_cst == 1);
            CHECK(b.i_logic == 1);
            CHECK(y_dec == y_gt);
            ++positive;
          }
          CHECK((b.total > 0.0) == gates_pass);
          const bool in_range =
              b.total == cfg.format_penalty || b.total == 0.0 ||
              (b.total >= cfg.alpha * (-4.0 * cfg.gamma_ord) &&
               b.total <= 1.0);
          CHECK(in_range);
          max_total = std::max(max_total, b.total);
        }
      }
    }
  }
  CHECK(max_total == 1.0);
  CHECK(positive > 0);
}

TEST_CASE("weight mask") {
  const reward::RewardConfig cfg;
  const auto m = reward::weight_mask(cfg);
  CHECK(m.weights[0] == 10.0);
  for (int i = 1; i <= 5; ++i) CHECK(m.weights[i] == 10.0);
  CHECK(m.weights[6] == 5.0);

  reward::RewardConfig flat = cfg;
  flat.w_decision = flat.w_trace = flat.w_final = 1.0;
  const auto u = reward::weight_mask(flat);
  for (double w : u.weights) CHECK(w == 1.0);
}

TEST_CASE("reward config invariants") {
  reward::RewardConfig cfg;
  CHECK(cfg.valid());
  cfg.alpha = 0.5;
  CHECK(!cfg.valid());  // alpha + beta must be 1
  cfg.alpha = 0.72;
  cfg.gamma_ord = -0.1;
  CHECK(!cfg.valid());
}

TEST_CASE("breakdown serializes to one JSONL record") {
  const reward::RewardConfig cfg;
  const auto text = grammar::render_trajectory(figure_trajectory());
  const auto b = reward::total_reward(text, 3, cfg);
  const auto j = nlohmann::json::parse(b.to_jsonl());
  CHECK(j.at("i_fmt") == 1);
  CHECK(j.at("i_cst") == 1);
  CHECK(j.at("i_logic") == 1);
  CHECK(j.at("y_hat") == 3);
  CHECK(j.at("r_res") == 1.0);
  CHECK(j.at("r_cot") == 1.0);
  CHECK(j.at("total") == 1.0);

  const auto bad = reward::total_reward("", 0, cfg);
  const auto jb = nlohmann::json::parse(bad.to_jsonl());
  CHECK(jb.at("y_hat").is_null());
  CHECK(jb.at("total") == -1.0);
}
