#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace groundbot::protocol {

// Abbreviations that never end a sentence. "No." only counts as an
// abbreviation when a number follows it ("No. 5").
const std::vector<std::string>& sentence_abbreviations();

// Splits on `.`, `!` or `?` (plus closing quotes/brackets) followed by
// whitespace or end of text. Whitespace is normalised first, so joining the
// result with single spaces reproduces the normalised input.
std::vector<std::string> split_sentences(std::string_view text);

}  // namespace groundbot::protocol
