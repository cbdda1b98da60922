#include "groundbot/chat/history.hpp"

#include "groundbot/core/errors.hpp"
#include "groundbot/llm/tokenizer.hpp"

namespace groundbot::chat {

std::size_t message_tokens(const ChatMessage& m) { return llm::count_tokens(m.text); }

std::vector<llm::WireMessage> history_window(const std::vector<ChatMessage>& messages, std::size_t budget) {
  if (messages.empty() || messages.front().role != Role::system) {
    throw PreconditionError("history must start with the system message");
  }
  std::vector<llm::WireMessage> out;
  if (budget == 0 || messages.size() == 1) {
    for (const auto& m : messages) out.push_back(to_wire(m));
    return out;
  }

  std::size_t total = 0;
  for (const auto& m : messages) total += message_tokens(m);
  const std::size_t minimum = message_tokens(messages.front()) + message_tokens(messages.back());
  if (minimum > budget) {
    throw PreconditionError("history budget " + std::to_string(budget) + " is below the minimum of " +
                            std::to_string(minimum) + " tokens");
  }

  // Candidates for dropping are messages[1 .. size-2], removed two at a time.
  std::size_t first = 1;
  const std::size_t last = messages.size() - 1;
  while (total > budget && first < last) {
    total -= message_tokens(messages[first]);
    ++first;
    if (first < last) {
      total -= message_tokens(messages[first]);
      ++first;
    }
  }
  out.push_back(to_wire(messages.front()));
  for (std::size_t i = first; i < messages.size(); ++i) out.push_back(to_wire(messages[i]));
  return out;
}

}  // namespace groundbot::chat
