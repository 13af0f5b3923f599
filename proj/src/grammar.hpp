#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

namespace afrlab::grammar {

inline constexpr int kNumLabels = 5;       // ordinal relevance scale 0..4
inline constexpr int kNumCheckpoints = 5;  // boxed steps 4..8
inline constexpr int kNumSlots = 7;        // decision + 5 checkpoints + final

/// Boxed sub-conclusion value. Steps 4-8 use Yes/No; the fixed step-3 box
/// renders None.
enum class CheckpointAnswer : uint8_t { Yes, No, None };

const char* to_string(CheckpointAnswer a);

/// One complete answer-first output: decision token, 9-step trace whose
/// steps 4-8 carry the policy-controlled checkpoints, final confirmation.
struct Trajectory {
  int y_dec = 0;
  std::array<CheckpointAnswer, kNumCheckpoints> checkpoints{};
  int y_final = 0;

  bool operator==(const Trajectory&) const = default;
};

/// True iff labels are in range and every checkpoint is Yes or No.
bool valid_trajectory(const Trajectory& t);

enum class FormatErrorKind : uint8_t {
  MissingDecision,
  MissingStep,
  BadBoxed,
  MissingFinal,
  ExtraContent,
};

struct FormatError {
  FormatErrorKind kind;
  int step = 0;  // meaningful for MissingStep / BadBoxed

  bool operator==(const FormatError&) const = default;
  /// Stable string code for CLI / log output, e.g. "missing_step_6".
  std::string code() const;
};

using ParseResult = std::variant<Trajectory, FormatError>;

/// Emits the canonical text: "[d]" line, <think> block with Step 1..9,
/// boxed answers in steps 4-8, </think>, "[d']" line. Exact byte layout is
/// frozen and covered by golden-file tests. No trailing newline.
std::string render_trajectory(const Trajectory& t);

/// Strict parser backing the format gate. Total over arbitrary input:
/// returns the Trajectory or the first violated rule.
ParseResult parse_trajectory(std::string_view text);

/// 1 iff parse_trajectory succeeds.
int format_gate(std::string_view text);

// --- slot view -------------------------------------------------------------
// The 7 policy-controlled slots: 0 = decision (vocab 5), 1..5 = checkpoints
// in steps 4-8 (vocab 2: 0 = No, 1 = Yes), 6 = final (vocab 5).

inline constexpr std::array<int, kNumSlots> kSlotVocab{5, 2, 2, 2, 2, 2, 5};
inline constexpr int kTokenNo = 0;
inline constexpr int kTokenYes = 1;

std::array<int, kNumSlots> slot_tokens(const Trajectory& t);
Trajectory trajectory_from_tokens(const std::array<int, kNumSlots>& tokens);

}  // namespace afrlab::grammar
