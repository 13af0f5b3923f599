#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <sstream>
#include <string>

#include "grammar.hpp"
#include "rng.hpp"

using namespace afrlab;
using grammar::CheckpointAnswer;
using grammar::FormatError;
using grammar::FormatErrorKind;
using grammar::Trajectory;

namespace {

Trajectory figure_trajectory() {
  // The worked example: decision 3, checkpoints (No,No,Yes,Yes,No), final 3.
  Trajectory t;
  t.y_dec = 3;
  t.checkpoints = {CheckpointAnswer::No, CheckpointAnswer::No,
                   CheckpointAnswer::Yes, CheckpointAnswer::Yes,
                   CheckpointAnswer::No};
  t.y_final = 3;
  return t;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Trajectory random_trajectory(Rng& rng) {
  Trajectory t;
  t.y_dec = static_cast<int>(rng.below(5));
  t.y_final = static_cast<int>(rng.below(5));
  for (auto& c : t.checkpoints) {
    c = rng.bernoulli(0.5) ? CheckpointAnswer::Yes : CheckpointAnswer::No;
  }
  return t;
}

FormatError expect_error(const std::string& text) {
  const auto r = grammar::parse_trajectory(text);
  REQUIRE(std::holds_alternative<FormatError>(r));
  return std::get<FormatError>(r);
}

std::string replace_first(std::string text, const std::string& from,
                          const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

std::string drop_line(const std::string& text, size_t line_idx) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) lines.push_back(line);
  REQUIRE(line_idx < lines.size());
  std::string out;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (i == line_idx) continue;
    out += lines[i];
    if (i + 1 < lines.size()) out += '\n';
  }
  return out;
}

}  // namespace

TEST_CASE("rendering matches the golden file byte for byte") {
  const std::string golden =
      read_file(std::string(AFRLAB_TEST_DATA_DIR) + "/traj_photosynthesis.txt");
  CHECK(grammar::render_trajectory(figure_trajectory()) == golden);
}

TEST_CASE("rendered text starts with the decision token line") {
  Trajectory t;
  t.y_dec = 0;
  t.checkpoints = {CheckpointAnswer::Yes, CheckpointAnswer::No,
                   CheckpointAnswer::No, CheckpointAnswer::No,
                   CheckpointAnswer::No};
  t.y_final = 0;
  const auto text = grammar::render_trajectory(t);
  CHECK(text.substr(0, 4) == "[0]\n");
}

TEST_CASE("parsing the golden example recovers the decision and final") {
  const auto r = grammar::parse_trajectory(
      read_file(std::string(AFRLAB_TEST_DATA_DIR) + "/traj_photosynthesis.txt"));
  REQUIRE(std::holds_alternative<Trajectory>(r));
  const auto& t = std::get<Trajectory>(r);
  CHECK(t.y_dec == 3);
  CHECK(t.y_final == 3);
  CHECK(t == figure_trajectory());
}

TEST_CASE("round trip over random valid trajectories") {
  Rng rng(17);
  for (int i = 0; i < 500; ++i) {
    const auto t = random_trajectory(rng);
    const auto r = grammar::parse_trajectory(grammar::render_trajectory(t));
    REQUIRE(std::holds_alternative<Trajectory>(r));
    CHECK(std::get<Trajectory>(r) == t);
  }
}

TEST_CASE("slot token view round trips") {
  Rng rng(23);
  for (int i = 0; i < 100; ++i) {
    const auto t = random_trajectory(rng);
    CHECK(grammar::trajectory_from_tokens(grammar::slot_tokens(t)) == t);
  }
}

TEST_CASE("first violated rule is reported") {
  const std::string good = grammar::render_trajectory(figure_trajectory());

  SUBCASE("empty input") {
    const auto e = expect_error("");
    CHECK(e.kind == FormatErrorKind::MissingDecision);
    CHECK(e.code() == "missing_decision");
  }
  SUBCASE("bad decision token") {
    CHECK(expect_error(replace_first(good, "[3]", "[7]")).kind ==
          FormatErrorKind::MissingDecision);
  }
  SUBCASE("deleted step 6") {
    const auto e = expect_error(drop_line(good, 7));
    CHECK(e.kind == FormatErrorKind::MissingStep);
    CHECK(e.step == 6);
    CHECK(e.code() == "missing_step_6");
  }
  SUBCASE("boxed Maybe at step 5") {
    const auto e = expect_error(
        replace_first(good, "Step 5: Weak? Partial or indirect answer check. "
                            "\\boxed{No}",
                      "Step 5: Weak? Partial or indirect answer check. "
                      "\\boxed{Maybe}"));
    CHECK(e.kind == FormatErrorKind::BadBoxed);
    CHECK(e.step == 5);
    CHECK(e.code() == "bad_boxed_5");
  }
  SUBCASE("None is not a checkpoint answer in steps 4-8") {
    const auto e = expect_error(
        replace_first(good, "Step 4: Irrelevant? Core intent coverage check. "
                            "\\boxed{No}",
                      "Step 4: Irrelevant? Core intent coverage check. "
                      "\\boxed{None}"));
    CHECK(e.kind == FormatErrorKind::BadBoxed);
    CHECK(e.step == 4);
  }
  SUBCASE("missing final confirmation") {
    const auto e = expect_error(drop_line(good, 12));
    CHECK(e.kind == FormatErrorKind::MissingFinal);
  }
  SUBCASE("content after the final token") {
    CHECK(expect_error(good + "\ntrailing junk").kind ==
          FormatErrorKind::ExtraContent);
  }
  SUBCASE("extra step inside the think block") {
    const auto e = expect_error(replace_first(
        good, "</think>", "Step 10: Bonus reasoning.\n</think>"));
    CHECK(e.kind == FormatErrorKind::ExtraContent);
  }
  SUBCASE("trailing newline is tolerated") {
    CHECK(grammar::format_gate(good + "\n") == 1);
  }
}

TEST_CASE("format gate") {
  const std::string good = grammar::render_trajectory(figure_trajectory());
  CHECK(grammar::format_gate(good) == 1);
  CHECK(grammar::format_gate("") == 0);
  const auto no_final = drop_line(good, 12);
  const auto r = grammar::parse_trajectory(no_final);
  REQUIRE(std::holds_alternative<FormatError>(r));
  CHECK(std::get<FormatError>(r).kind == FormatErrorKind::MissingFinal);
  CHECK(grammar::format_gate(no_final) == 0);
}

TEST_CASE("every structural mutation flips the gate") {
  const std::string good = grammar::render_trajectory(figure_trajectory());
  // Dropping any line breaks the format.
  for (size_t i = 0; i < 13; ++i) {
    CAPTURE(i);
    CHECK(grammar::format_gate(drop_line(good, i)) == 0);
  }
  // Corrupting any box marker breaks the format.
  size_t pos = 0;
  int boxes = 0;
  while ((pos = good.find("\\boxed{", pos)) != std::string::npos) {
    std::string mutated = good;
    mutated[pos + 1] = '0';
    CHECK(grammar::format_gate(mutated) == 0);
    ++boxes;
    ++pos;
  }
  CHECK(boxes == 7);
}

TEST_CASE("parser is total on arbitrary bytes") {
  Rng rng(99);
  for (int i = 0; i < 300; ++i) {
    std::string junk;
    const size_t len = rng.below(400);
    for (size_t j = 0; j < len; ++j) {
      junk += static_cast<char>(rng.below(256));
    }
    const auto r = grammar::parse_trajectory(junk);  // must not crash
    (void)r;
    grammar::format_gate(junk);
  }
}

TEST_CASE("render rejects invalid trajectories") {
  Trajectory bad = figure_trajectory();
  bad.y_dec = 9;
  CHECK_THROWS_AS(grammar::render_trajectory(bad), std::invalid_argument);
  Trajectory none_box = figure_trajectory();
  none_box.checkpoints[2] = CheckpointAnswer::None;
  CHECK(!grammar::valid_trajectory(none_box));
  CHECK_THROWS_AS(grammar::render_trajectory(none_box), std::invalid_argument);
}
