#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace groundbot::llm {

// Approximate token counter used for history budgets and response-length
// metrics. Not the remote model's tokenizer; reports label it "approx tokens".
//
// Rule: a token is either a word (maximal run of ASCII letters/digits and
// non-ASCII bytes, with apostrophes allowed between word characters, so
// "that's" is one token) or a single other non-whitespace character.
std::vector<std::string> tokenize(std::string_view text);
std::size_t count_tokens(std::string_view text);

}  // namespace groundbot::llm
