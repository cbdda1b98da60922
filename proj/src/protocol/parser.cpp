#include "groundbot/protocol/parser.hpp"

#include <algorithm>
#include <optional>

#include "groundbot/core/text.hpp"

namespace groundbot::protocol {

std::string_view to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::say: return "SAY";
    case SegmentKind::action: return "ACTION";
    case SegmentKind::thought: return "THOUGHT";
  }
  return "?";
}

std::string_view to_string(AnomalyReason reason) {
  switch (reason) {
    case AnomalyReason::malformed: return "MALFORMED";
    case AnomalyReason::unknown_action: return "UNKNOWN_ACTION";
    case AnomalyReason::bad_argument: return "BAD_ARGUMENT";
  }
  return "?";
}

ResponseSegment ResponseSegment::say(std::string text) { return {SegmentKind::say, std::move(text), {}}; }
ResponseSegment ResponseSegment::thought(std::string text) { return {SegmentKind::thought, std::move(text), {}}; }
ResponseSegment ResponseSegment::action(ActionCall call) { return {SegmentKind::action, {}, std::move(call)}; }

bool Anomaly::has(AnomalyReason r) const { return std::find(reasons.begin(), reasons.end(), r) != reasons.end(); }

std::vector<ActionCall> ResponsePlan::actions() const {
  std::vector<ActionCall> out;
  for (const auto& s : segments) {
    if (s.kind == SegmentKind::action) out.push_back(s.call);
  }
  return out;
}

namespace {

constexpr std::size_t kMaxSwappedArgument = 40;

bool ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool inline_space(char c) { return c == ' ' || c == '\t'; }
bool statement_punct(char c) {
  return c == '.' || c == '!' || c == '?' || c == ',' || c == ';' || c == ':';
}

bool all_statement_punct(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), statement_punct);
}

enum class TagShape { exact, bare, unclosed_paren, missing_angle, swapped };

struct TagParts {
  TagShape shape;
  std::string name;
  std::string argument;
  std::size_t length;  // characters consumed, excluding trailing punctuation
};

std::size_t skip_inline_space(std::string_view s, std::size_t i) {
  while (i < s.size() && inline_space(s[i])) ++i;
  return i;
}

std::size_t read_ident(std::string_view s, std::size_t i) {
  while (i < s.size() && ident_char(s[i])) ++i;
  return i;
}

// Shapes opened by '<'.
std::optional<TagParts> match_angle(std::string_view s, std::size_t i) {
  if (i >= s.size() || s[i] != '<') return std::nullopt;
  std::size_t j = skip_inline_space(s, i + 1);
  if (j >= s.size() || !ident_start(s[j])) return std::nullopt;
  std::size_t name_end = read_ident(s, j);
  std::string name(s.substr(j, name_end - j));
  std::size_t k = skip_inline_space(s, name_end);
  if (k < s.size() && s[k] == '(') {
    std::size_t m = k + 1;
    while (m < s.size() && s[m] != ')' && s[m] != '>' && s[m] != '\n' && s[m] != '<') ++m;
    if (m >= s.size()) return std::nullopt;
    std::string arg(text::trim(s.substr(k + 1, m - k - 1)));
    if (s[m] == ')') {
      std::size_t p = skip_inline_space(s, m + 1);
      if (p < s.size() && s[p] == '>') return TagParts{TagShape::exact, name, arg, p + 1 - i};
      return TagParts{TagShape::missing_angle, name, arg, m + 1 - i};
    }
    if (s[m] == '>') return TagParts{TagShape::unclosed_paren, name, arg, m + 1 - i};
    return std::nullopt;
  }
  if (k == name_end && k < s.size() && s[k] == '>' && j == i + 1) {
    return TagParts{TagShape::bare, name, {}, k + 1 - i};
  }
  return std::nullopt;
}

// `name<arg>` with no whitespace between the name and '<'.
std::optional<TagParts> match_swapped(std::string_view s, std::size_t i) {
  if (i >= s.size() || !ident_start(s[i])) return std::nullopt;
  if (i > 0 && ident_char(s[i - 1])) return std::nullopt;
  std::size_t e = read_ident(s, i);
  if (e >= s.size() || s[e] != '<') return std::nullopt;
  std::size_t m = e + 1;
  while (m < s.size() && m - e - 1 <= kMaxSwappedArgument && s[m] != '>' && s[m] != '\n' && s[m] != '<' &&
         s[m] != '(' && s[m] != ')') {
    ++m;
  }
  if (m >= s.size() || s[m] != '>' || m - e - 1 > kMaxSwappedArgument) return std::nullopt;
  std::string arg(text::trim(s.substr(e + 1, m - e - 1)));
  if (arg.empty()) return std::nullopt;
  return TagParts{TagShape::swapped, std::string(s.substr(i, e - i)), arg, m + 1 - i};
}

std::optional<TagParts> match_tag(std::string_view s, std::size_t i) {
  if (auto t = match_angle(s, i)) return t;
  return match_swapped(s, i);
}

TagResult classify(const TagParts& parts, std::string raw, const ActionRegistry& registry) {
  Anomaly anomaly{std::move(raw), {}, 0};
  if (parts.shape != TagShape::exact) anomaly.reasons.push_back(AnomalyReason::malformed);
  const ActionSpec* spec = registry.find(parts.name);
  if (!spec) {
    anomaly.reasons.push_back(AnomalyReason::unknown_action);
  } else if (!argument_in_domain(*spec, parts.argument)) {
    anomaly.reasons.push_back(AnomalyReason::bad_argument);
  }
  if (anomaly.reasons.empty()) return ActionCall{parts.name, parts.argument, std::move(anomaly.raw_text)};
  return anomaly;
}

struct TagHit {
  std::size_t begin;
  std::size_t end;
  TagResult result;
};

std::vector<TagHit> scan_tags(std::string_view s, const ActionRegistry& registry) {
  std::vector<TagHit> hits;
  std::size_t i = 0;
  while (i < s.size()) {
    auto parts = match_tag(s, i);
    if (!parts) {
      ++i;
      continue;
    }
    std::size_t end = i + parts->length;
    while (end < s.size() && statement_punct(s[end])) ++end;
    hits.push_back({i, end, classify(*parts, std::string(s.substr(i, end - i)), registry)});
    i = end;
  }
  return hits;
}

struct ThoughtSpan {
  std::size_t begin;  // opening delimiter
  std::size_t end;    // one past closing delimiter
  std::size_t content_begin;
  std::size_t content_end;
};

class TagMask {
 public:
  explicit TagMask(const std::vector<TagHit>& hits) : hits_(hits) {}

  // End of the tag covering i, or npos.
  std::size_t tag_end_at(std::size_t i) const {
    auto it = std::upper_bound(hits_.begin(), hits_.end(), i,
                               [](std::size_t pos, const TagHit& h) { return pos < h.begin; });
    if (it == hits_.begin()) return std::string_view::npos;
    --it;
    return (i >= it->begin && i < it->end) ? it->end : std::string_view::npos;
  }

 private:
  const std::vector<TagHit>& hits_;
};

std::size_t word_count(std::string_view s) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : s) {
    if (text::is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

// Closing index for every '(' outside tags that has a partner, npos otherwise.
std::vector<std::size_t> match_parens(std::string_view s, const TagMask& mask) {
  std::vector<std::size_t> match(s.size(), std::string_view::npos);
  std::vector<std::size_t> open;
  std::size_t i = 0;
  while (i < s.size()) {
    if (auto te = mask.tag_end_at(i); te != std::string_view::npos) {
      i = te;
      continue;
    }
    if (s[i] == '(') {
      open.push_back(i);
    } else if (s[i] == ')' && !open.empty()) {
      match[open.back()] = i;
      open.pop_back();
    }
    ++i;
  }
  return match;
}

std::size_t find_asterisk_run(std::string_view s, std::size_t from, std::size_t run, const TagMask& mask) {
  std::size_t i = from;
  while (i < s.size()) {
    if (auto te = mask.tag_end_at(i); te != std::string_view::npos) {
      i = te;
      continue;
    }
    if (s[i] == '*') {
      std::size_t r = 0;
      while (i + r < s.size() && s[i + r] == '*') ++r;
      if (r >= run) return i;
      i += r;
      continue;
    }
    ++i;
  }
  return std::string_view::npos;
}

std::vector<ThoughtSpan> scan_thoughts(std::string_view s, const TagMask& mask) {
  std::vector<ThoughtSpan> spans;
  const auto paren_match = match_parens(s, mask);
  std::size_t i = 0;
  while (i < s.size()) {
    if (auto te = mask.tag_end_at(i); te != std::string_view::npos) {
      i = te;
      continue;
    }
    if (s[i] == '(') {
      std::size_t close = paren_match[i];
      if (close == std::string_view::npos) {
        ++i;  // unbalanced: spoken as-is
        continue;
      }
      if (word_count(s.substr(i + 1, close - i - 1)) > 2) spans.push_back({i, close + 1, i + 1, close});
      i = close + 1;
      continue;
    }
    if (s[i] == '*') {
      std::size_t run = 0;
      while (i + run < s.size() && s[i + run] == '*') ++run;
      std::size_t close = find_asterisk_run(s, i + run, run, mask);
      if (close == std::string_view::npos || text::trim(s.substr(i + run, close - i - run)).empty()) {
        i += run;
        continue;
      }
      spans.push_back({i, close + run, i + run, close});
      i = close + run;
      continue;
    }
    ++i;
  }
  return spans;
}

class PlanBuilder {
 public:
  void say(std::string_view piece) {
    auto t = text::trim(piece);
    if (t.empty()) return;
    auto& segs = plan_.segments;
    if (all_statement_punct(t) && !segs.empty() && segs.back().kind == SegmentKind::thought) {
      // Punctuation closing a sentence that a thought interrupted.
      std::size_t k = segs.size();
      while (k > 0 && segs[k - 1].kind == SegmentKind::thought) --k;
      bool attachable = k > 0 && segs[k - 1].kind == SegmentKind::say && anomaly_free_since(k);
      auto& target = attachable ? segs[k - 1].text : segs.back().text;
      target += t;
      return;
    }
    if (!segs.empty() && segs.back().kind == SegmentKind::say) {
      segs.back().text += ' ';
      segs.back().text += t;
    } else {
      segs.push_back(ResponseSegment::say(std::string(t)));
    }
  }

  void thought(std::string_view piece) {
    auto t = text::trim(piece);
    if (t.empty()) return;
    plan_.segments.push_back(ResponseSegment::thought(std::string(t)));
  }

  void tag(const TagResult& result) {
    if (const auto* call = std::get_if<ActionCall>(&result)) {
      plan_.segments.push_back(ResponseSegment::action(*call));
      } else {
      Anomaly a = std::get<Anomaly>(result);
      a.position = plan_.segments.size();
      plan_.anomalies.push_back(std::move(a));
    }
  }

  ResponsePlan take() { return std::move(plan_); }

 private:
  bool anomaly_free_since(std::size_t position) const {
    return std::none_of(plan_.anomalies.begin(), plan_.anomalies.end(),
                        [&](const Anomaly& a) { return a.position >= position; });
  }

  ResponsePlan plan_;
};

// Emits text in [from, to) as `kind` pieces split around any tags inside it.
void emit_range(PlanBuilder& b, std::string_view s, std::size_t from, std::size_t to,
                const std::vector<TagHit>& tags, std::size_t& next_tag, bool as_thought) {
  std::size_t cursor = from;
  while (next_tag < tags.size() && tags[next_tag].begin < to) {
    const auto& t = tags[next_tag];
    auto piece = s.substr(cursor, t.begin - cursor);
    as_thought ? b.thought(piece) : b.say(piece);
    b.tag(t.result);
    cursor = t.end;
    ++next_tag;
  }
  if (cursor < to) {
    auto piece = s.substr(cursor, to - cursor);
    as_thought ? b.thought(piece) : b.say(piece);
  }
}

ResponsePlan build_plan(std::string_view s, const std::vector<TagHit>& tags) {
  TagMask mask(tags);
  auto thoughts = scan_thoughts(s, mask);
  PlanBuilder b;
  std::size_t next_tag = 0;
  std::size_t cursor = 0;
  for (const auto& th : thoughts) {
    emit_range(b, s, cursor, th.begin, tags, next_tag, false);
    emit_range(b, s, th.content_begin, th.content_end, tags, next_tag, true);
    cursor = th.end;
  }
  emit_range(b, s, cursor, s.size(), tags, next_tag, false);
  return b.take();
}

}  // namespace

TagResult normalize_action_tag(std::string_view raw, const ActionRegistry& registry) {
  std::string_view body = text::trim(raw);
  while (!body.empty() && statement_punct(body.back())) body.remove_suffix(1);
  auto parts = match_tag(body, 0);
  if (!parts || parts->length != body.size()) {
    return Anomaly{std::string(raw), {AnomalyReason::malformed}, 0};
  }
  return classify(*parts, std::string(raw), registry);
}

std::vector<ResponseSegment> extract_thoughts(std::string_view text) {
  return build_plan(text, {}).segments;
}

ResponsePlan parse_response(std::string_view text, const ActionRegistry& registry) {
  return build_plan(text, scan_tags(text, registry));
}

std::string render_plan(const ResponsePlan& plan) {
  std::string out;
  for (const auto& seg : plan.segments) {
    if (!out.empty()) out += ' ';
    switch (seg.kind) {
      case SegmentKind::say: out += seg.text; break;
      case SegmentKind::thought: out += "*" + seg.text + "*"; break;
      case SegmentKind::action: out += "<" + seg.call.action + "(" + seg.call.argument + ")>"; break;
    }
  }
  return out;
}

}  // namespace groundbot::protocol
