#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace groundbot::text {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
// Lowercase, collapse whitespace runs to one space, trim.
std::string normalize(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
bool is_space(char c);

}  // namespace groundbot::text
