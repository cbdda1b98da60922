#include "groundbot/protocol/sentences.hpp"

#include <algorithm>

#include "groundbot/core/text.hpp"

namespace groundbot::protocol {

const std::vector<std::string>& sentence_abbreviations() {
  static const std::vector<std::string> abbrevs{"Mr.", "Dr.", "e.g.", "i.e.", "etc.", "vs.", "No."};
  return abbrevs;
}

namespace {

bool terminal(char c) { return c == '.' || c == '!' || c == '?'; }
bool closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }
bool digit(char c) { return c >= '0' && c <= '9'; }

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending = false;
  for (char c : s) {
    if (text::is_space(c)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

// Word ending at `end` (exclusive), i.e. back to the previous space.
std::string_view word_before(std::string_view s, std::size_t end) {
  std::size_t b = s.rfind(' ', end == 0 ? 0 : end - 1);
  b = (b == std::string_view::npos) ? 0 : b + 1;
  return s.substr(b, end - b);
}

bool protected_abbreviation(std::string_view s, std::size_t dot, std::size_t next_word) {
  auto word = word_before(s, dot + 1);
  for (const auto& a : sentence_abbreviations()) {
    if (word != a) continue;
    if (a == "No.") return next_word < s.size() && digit(s[next_word]);
    return true;
  }
  return false;
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view input) {
  const std::string s = collapse_whitespace(input);
  std::vector<std::string> out;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!terminal(s[i])) {
      ++i;
      continue;
    }
    std::size_t run_end = i;
    while (run_end < s.size() && terminal(s[run_end])) ++run_end;
    std::size_t end = run_end;
    while (end < s.size() && closer(s[end])) ++end;
    bool boundary = end == s.size() || s[end] == ' ';
    if (boundary && run_end - i == 1 && s[i] == '.' && protected_abbreviation(s, i, end + 1)) boundary = false;
    if (boundary) {
      out.emplace_back(s.substr(start, end - start));
      start = end + 1;
    }
    i = end;
  }
  if (start < s.size()) out.emplace_back(s.substr(start));
  return out;
}

}  // namespace groundbot::protocol
