#include "groundbot/chat/message.hpp"

#include <stdexcept>

#include <json.hpp>

namespace groundbot::chat {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::internal_query: return "internal_query";
    case Role::user_query: return "user_query";
    case Role::assistant: return "assistant";
  }
  return "?";
}

std::string_view to_string(MessageTag tag) {
  switch (tag) {
    case MessageTag::system: return "system";
    case MessageTag::priming: return "priming";
    case MessageTag::object_facts: return "object_facts";
    case MessageTag::status_update: return "status_update";
    case MessageTag::user_turn: return "user_turn";
  }
  return "?";
}

std::optional<Role> role_from_string(std::string_view s) {
  for (auto r : {Role::system, Role::internal_query, Role::user_query, Role::assistant}) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

std::optional<MessageTag> tag_from_string(std::string_view s) {
  for (auto t : {MessageTag::system, MessageTag::priming, MessageTag::object_facts, MessageTag::status_update,
                 MessageTag::user_turn}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

std::string_view wire_role(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::assistant: return "assistant";
    case Role::internal_query:
    case Role::user_query: return "user";
  }
  return "user";
}

llm::WireMessage to_wire(const ChatMessage& m) { return {std::string(wire_role(m.role)), m.text}; }

std::string to_jsonl(const std::vector<ChatMessage>& messages) {
  std::string out;
  for (const auto& m : messages) {
    nlohmann::ordered_json j;
    j["role"] = to_string(m.role);
    j["text"] = m.text;
    j["timestamp"] = m.timestamp;
    j["tag"] = to_string(m.tag);
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<ChatMessage> parse_jsonl(std::string_view jsonl) {
  std::vector<ChatMessage> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    auto end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    auto line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    auto fail = [&](const std::string& why) {
      return std::runtime_error("transcript line " + std::to_string(line_no) + ": " + why);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw fail(e.what());
    }
    if (!j.is_object() || !j.contains("role") || !j.contains("text")) throw fail("missing role or text");
    ChatMessage m;
    auto role = role_from_string(j["role"].get<std::string>());
    if (!role) throw fail("unknown role");
    m.role = *role;
    m.text = j["text"].get<std::string>();
    m.timestamp = j.value("timestamp", 0.0);
    if (j.contains("tag")) {
      auto tag = tag_from_string(j["tag"].get<std::string>());
      if (!tag) throw fail("unknown tag");
      m.tag = *tag;
    } else {
      m.tag = m.role == Role::system ? MessageTag::system : MessageTag::user_turn;
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace groundbot::chat
