#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "groundbot/llm/backend.hpp"

namespace groundbot::chat {

enum class Role { system, internal_query, user_query, assistant };

// What a message belongs to. An ASSISTANT message carries the tag of the query
// it answers.
enum class MessageTag { system, priming, object_facts, status_update, user_turn };

struct ChatMessage {
  Role role = Role::system;
  std::string text;
  double timestamp = 0.0;  // seconds since the epoch
  MessageTag tag = MessageTag::system;

  bool operator==(const ChatMessage&) const = default;
};

std::string_view to_string(Role role);
std::string_view to_string(MessageTag tag);
std::optional<Role> role_from_string(std::string_view s);
std::optional<MessageTag> tag_from_string(std::string_view s);

// INTERNAL_QUERY and USER_QUERY both go out as "user".
std::string_view wire_role(Role role);
llm::WireMessage to_wire(const ChatMessage& m);

// Line-delimited {role, text, timestamp, tag} records.
std::string to_jsonl(const std::vector<ChatMessage>& messages);
// Throws std::runtime_error naming the offending line.
std::vector<ChatMessage> parse_jsonl(std::string_view jsonl);

}  // namespace groundbot::chat
