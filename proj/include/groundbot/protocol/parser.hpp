#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "groundbot/protocol/actions.hpp"

namespace groundbot::protocol {

enum class SegmentKind { say, action, thought };

enum class AnomalyReason { malformed, unknown_action, bad_argument };

std::string_view to_string(SegmentKind kind);
std::string_view to_string(AnomalyReason reason);

struct ResponseSegment {
  SegmentKind kind = SegmentKind::say;
  std::string text;   // SAY / THOUGHT
  ActionCall call;    // ACTION

  static ResponseSegment say(std::string text);
  static ResponseSegment thought(std::string text);
  static ResponseSegment action(ActionCall call);

  bool operator==(const ResponseSegment&) const = default;
};

// A near-miss or invalid action tag. Never executed and never spoken.
struct Anomaly {
  std::string raw_text;
  std::vector<AnomalyReason> reasons;
  std::size_t position = 0;  // number of plan segments preceding it

  bool has(AnomalyReason r) const;
  bool operator==(const Anomaly&) const = default;
};

struct ResponsePlan {
  std::vector<ResponseSegment> segments;
  std::vector<Anomaly> anomalies;

  std::vector<ActionCall> actions() const;
  bool operator==(const ResponsePlan&) const = default;
};

using TagResult = std::variant<ActionCall, Anomaly>;

// Classifies one span produced by the tag scanner. Accepts the exact
// `<name(arg)>` form (whitespace tolerated around tokens) and recognises the
// near-miss shapes `name<arg>`, `<name>`, `<name(arg>` and `<name(arg)`.
// Trailing statement punctuation after the closing bracket is allowed and kept
// in raw_text.
TagResult normalize_action_tag(std::string_view raw, const ActionRegistry& registry);

// Splits a tag-free span into SAY and THOUGHT segments. Top-level parenthesised
// spans of more than two words and asterisk-delimited spans are thoughts.
// Unbalanced delimiters stay in the spoken text.
std::vector<ResponseSegment> extract_thoughts(std::string_view text);

// Parses a raw LLM answer. Total: never throws for any input.
ResponsePlan parse_response(std::string_view text, const ActionRegistry& registry);

// Inverse of parse_response for plans made of SAY, ACTION and THOUGHT
// segments: tags are rendered `<action(arg)>`, thoughts as `*text*`.
std::string render_plan(const ResponsePlan& plan);

}  // namespace groundbot::protocol
