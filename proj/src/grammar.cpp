#include "grammar.hpp"

#include <stdexcept>
#include <vector>

namespace afrlab::grammar {

namespace {

// Fixed trace prose. Steps 1-3 and 9 are template text (step 2/3 boxes are
// template-fixed); steps 4-8 carry the policy-controlled boxed answers.
constexpr const char* kStepPrefix[9] = {
    "Step 1: Intent. Identify what the query is asking for.",
    "Step 2: Domain. Query and document domains align. ",
    "Step 3: Freshness. No timeliness constraint applies. ",
    "Step 4: Irrelevant? Core intent coverage check. ",
    "Step 5: Weak? Partial or indirect answer check. ",
    "Step 6: Strong? Direct and complete answer check. ",
    "Step 7: Premium? Depth and quality check. ",
    "Step 8: Official? Authoritative source check. ",
    "Step 9: Synthesis. Checkpoints jointly support the decision.",
};

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kBoxOpen = "\\boxed{";

void append_label_line(std::string& out, int label) {
  out += '[';
  out += static_cast<char>('0' + label);
  out += ']';
}

void append_boxed(std::string& out, CheckpointAnswer a) {
  out += kBoxOpen;
  out += to_string(a);
  out += '}';
}

bool parse_label_line(std::string_view line, int& label) {
  if (line.size() != 3 || line[0] != '[' || line[2] != ']') return false;
  if (line[1] < '0' || line[1] > '4') return false;
  label = line[1] - '0';
  return true;
}

bool parse_answer(std::string_view text, CheckpointAnswer& out) {
  if (text == "Yes") {
    out = CheckpointAnswer::Yes;
  } else if (text == "No") {
    out = CheckpointAnswer::No;
  } else if (text == "None") {
    out = CheckpointAnswer::None;
  } else {
    return false;
  }
  return true;
}

// Extracts the boxed value from a line that must end with `\boxed{...}`
// and contain exactly one box. Returns false on any structural defect.
bool extract_boxed(std::string_view line, CheckpointAnswer& out) {
  size_t open = line.find(kBoxOpen);
  if (open == std::string_view::npos) return false;
  if (line.find(kBoxOpen, open + 1) != std::string_view::npos) return false;
  if (line.back() != '}') return false;
  std::string_view inner =
      line.substr(open + kBoxOpen.size(),
                  line.size() - open - kBoxOpen.size() - 1);
  if (inner.find('}') != std::string_view::npos) return false;
  return parse_answer(inner, out);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  size_t start = 0;
  while (start <= text.size()) {
    size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

}  // namespace

const char* to_string(CheckpointAnswer a) {
  switch (a) {
    case CheckpointAnswer::Yes: return "Yes";
    case CheckpointAnswer::No: return "No";
    case CheckpointAnswer::None: return "None";
  }
  return "?";
}

bool valid_trajectory(const Trajectory& t) {
  if (t.y_dec < 0 || t.y_dec >= kNumLabels) return false;
  if (t.y_final < 0 || t.y_final >= kNumLabels) return false;
  for (CheckpointAnswer a : t.checkpoints) {
    if (a != CheckpointAnswer::Yes && a != CheckpointAnswer::No) return false;
  }
  return true;
}

std::string FormatError::code() const {
  switch (kind) {
    case FormatErrorKind::MissingDecision: return "missing_decision";
    case FormatErrorKind::MissingStep:
      return "missing_step_" + std::to_string(step);
    case FormatErrorKind::BadBoxed:
      return "bad_boxed_" + std::to_string(step);
    case FormatErrorKind::MissingFinal: return "missing_final";
    case FormatErrorKind::ExtraContent: return "extra_content";
  }
  return "unknown";
}

std::string render_trajectory(const Trajectory& t) {
  if (!valid_trajectory(t)) {
    throw std::invalid_argument("render_trajectory: invalid trajectory");
  }
  std::string out;
  out.reserve(512);
  append_label_line(out, t.y_dec);
  out += '\n';
  out += kThinkOpen;
  out += '\n';
  for (int step = 1; step <= 9; ++step) {
    out += kStepPrefix[step - 1];
    if (step == 2) {
      append_boxed(out, CheckpointAnswer::Yes);
    } else if (step == 3) {
      append_boxed(out, CheckpointAnswer::None);
    } else if (step >= 4 && step <= 8) {
      append_boxed(out, t.checkpoints[step - 4]);
    }
    out += '\n';
  }
  out += kThinkClose;
  out += '\n';
  append_label_line(out, t.y_final);
  return out;
}

ParseResult parse_trajectory(std::string_view text) {
  const auto lines = split_lines(text);
  const auto fail = [](FormatErrorKind kind, int step = 0) {
    return ParseResult{FormatError{kind, step}};
  };

  Trajectory t;
  if (lines.empty() || !parse_label_line(lines[0], t.y_dec)) {
    return fail(FormatErrorKind::MissingDecision);
  }
  // The think-block open is attributed to step 1: there is no dedicated
  // error code for it in the format vocabulary.
  if (lines.size() < 2 || lines[1] != kThinkOpen) {
    return fail(FormatErrorKind::MissingStep, 1);
  }
  for (int step = 1; step <= 9; ++step) {
    const size_t idx = 1 + static_cast<size_t>(step);
    const std::string header = "Step " + std::to_string(step) + ": ";
    if (idx >= lines.size() || !lines[idx].starts_with(header)) {
      return fail(FormatErrorKind::MissingStep, step);
    }
    const std::string_view line = lines[idx];
    const bool has_box = line.find(kBoxOpen) != std::string_view::npos;
    if (step == 1 || step == 9) {
      if (has_box) return fail(FormatErrorKind::BadBoxed, step);
      continue;
    }
    CheckpointAnswer a;
    if (!extract_boxed(line, a)) return fail(FormatErrorKind::BadBoxed, step);
    if (step >= 4) {
      if (a == CheckpointAnswer::None) {
        return fail(FormatErrorKind::BadBoxed, step);
      }
      t.checkpoints[step - 4] = a;
    }
    // Steps 2-3: box must be structurally valid; the value is template
    // prose, not a policy decision, so any enum member passes.
  }
  if (lines.size() < 12) return fail(FormatErrorKind::MissingFinal);
  if (lines[11] != kThinkClose) {
    if (lines[11].starts_with("Step ")) {
      return fail(FormatErrorKind::ExtraContent);
    }
    return fail(FormatErrorKind::MissingFinal);
  }
  if (lines.size() < 13 || !parse_label_line(lines[12], t.y_final)) {
    return fail(FormatErrorKind::MissingFinal);
  }
  for (size_t i = 13; i < lines.size(); ++i) {
    if (!lines[i].empty()) return fail(FormatErrorKind::ExtraContent);
  }
  return ParseResult{t};
}

int format_gate(std::string_view text) {
  return std::holds_alternative<Trajectory>(parse_trajectory(text)) ? 1 : 0;
}

std::array<int, kNumSlots> slot_tokens(const Trajectory& t) {
  std::array<int, kNumSlots> tokens{};
  tokens[0] = t.y_dec;
  for (int i = 0; i < kNumCheckpoints; ++i) {
    tokens[1 + i] =
        t.checkpoints[i] == CheckpointAnswer::Yes ? kTokenYes : kTokenNo;
  }
  tokens[6] = t.y_final;
  return tokens;
}

Trajectory trajectory_from_tokens(const std::array<int, kNumSlots>& tokens) {
  for (int s = 0; s < kNumSlots; ++s) {
    if (tokens[s] < 0 || tokens[s] >= kSlotVocab[s]) {
      throw std::invalid_argument("trajectory_from_tokens: token out of range");
    }
  }
  Trajectory t;
  t.y_dec = tokens[0];
  for (int i = 0; i < kNumCheckpoints; ++i) {
    t.checkpoints[i] = tokens[1 + i] == kTokenYes ? CheckpointAnswer::Yes
                                                  : CheckpointAnswer::No;
  }
  t.y_final = tokens[6];
  return t;
}

}  // namespace afrlab::grammar
