#pragma once

#include <cstddef>
#include <vector>

#include "groundbot/chat/message.hpp"
#include "groundbot/llm/backend.hpp"

namespace groundbot::chat {

std::size_t message_tokens(const ChatMessage& m);

// Messages to send for a completion. The SYSTEM message stays first and the
// newest message last; the oldest query/answer pairs are dropped until the
// approximate token total fits. budget == 0 means unlimited. Throws
// PreconditionError when even SYSTEM plus the newest message do not fit.
std::vector<llm::WireMessage> history_window(const std::vector<ChatMessage>& messages, std::size_t budget);

}  // namespace groundbot::chat
