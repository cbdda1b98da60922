#include "groundbot/llm/backend.hpp"

#include "groundbot/core/errors.hpp"
#include "groundbot/core/text.hpp"

namespace groundbot::llm {

std::string_view to_string(BackendErrorKind kind) {
  switch (kind) {
    case BackendErrorKind::transport: return "TRANSPORT";
    case BackendErrorKind::remote: return "REMOTE";
    case BackendErrorKind::context_overflow: return "CONTEXT_OVERFLOW";
    case BackendErrorKind::fixture_exhausted: return "FIXTURE_EXHAUSTED";
    case BackendErrorKind::fixture_mismatch: return "FIXTURE_MISMATCH";
  }
  return "?";
}

void check_messages(std::span<const WireMessage> messages) {
  if (messages.empty()) throw PreconditionError("completion needs at least one message");
  if (messages.front().role != "system") throw PreconditionError("first message must be the system prompt");
}

std::string rtrim(std::string s) {
  while (!s.empty() && text::is_space(s.back())) s.pop_back();
  return s;
}

}  // namespace groundbot::llm
