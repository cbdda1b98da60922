#include "groundbot/llm/tokenizer.hpp"

#include "groundbot/core/text.hpp"

namespace groundbot::llm {

namespace {

bool word_char(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

template <typename Emit>
void scan(std::string_view s, Emit&& emit) {
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    if (text::is_space(s[i])) {
      ++i;
      continue;
    }
    if (!word_char(c)) {
      emit(s.substr(i, 1));
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size()) {
      auto d = static_cast<unsigned char>(s[j]);
      if (word_char(d)) {
        ++j;
      } else if (d == '\'' && j + 1 < s.size() && word_char(static_cast<unsigned char>(s[j + 1]))) {
        j += 2;
      } else {
        break;
      }
    }
    emit(s.substr(i, j - i));
    i = j;
  }
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  scan(text, [&](std::string_view t) { out.emplace_back(t); });
  return out;
}

std::size_t count_tokens(std::string_view text) {
  std::size_t n = 0;
  scan(text, [&](std::string_view) { ++n; });
  return n;
}

}  // namespace groundbot::llm
