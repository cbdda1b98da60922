#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "groundbot/chat/message.hpp"
#include "groundbot/core/world_diff.hpp"
#include "groundbot/llm/backend.hpp"
#include "groundbot/protocol/actions.hpp"
#include "groundbot/protocol/parser.hpp"
#include "groundbot/protocol/prompts.hpp"

namespace groundbot::chat {

struct SessionConfig {
  llm::CompletionParams completion;
  bool priming = true;
  bool object_facts = true;
  // When true, an empty table is announced once before the first user turn.
  bool perception_active = false;
  std::size_t history_budget = 0;  // approximate tokens, 0 = unlimited
};

using Clock = std::function<double()>;

double wall_clock();

// Not thread-safe; callers serialize access (the gateway runs one executor per session).
class ChatSession {
 public:
  // Sends the system prompt and, if enabled, the priming round.
  // Backend failures propagate as llm::BackendError.
  static ChatSession start(SessionConfig config, protocol::ActionRegistry registry, protocol::RobotProfile profile,
                           std::shared_ptr<llm::LlmBackend> backend, Clock clock = wall_clock);

  // Flushes queued facts queries and any pending status update, then sends the
  // augmented user prompt and parses the answer. On failure the failed query is
  // removed from history and the error rethrown.
  protocol::ResponsePlan user_turn(std::string_view utterance);

  void ingest_world_diff(const WorldDiff& diff);
  void note_action_failure(const std::string& action, const std::string& object);

  // Issues queued facts queries and the pending status update now.
  void flush();

  bool status_pending() const;
  std::optional<std::string> pending_status_text() const;

  const std::vector<ChatMessage>& messages() const { return messages_; }
  const std::vector<std::string>& current_objects() const { return current_; }
  const std::vector<std::string>& last_reported_objects() const { return last_reported_; }
  const std::vector<std::string>& pending_gestures() const { return gestures_; }
  const std::vector<std::string>& queued_facts() const { return facts_queue_; }
  const std::set<std::string>& known_objects() const { return known_; }
  const SessionConfig& config() const { return config_; }
  const protocol::ActionRegistry& registry() const { return registry_; }
  const protocol::RobotProfile& profile() const { return profile_; }
  std::size_t facts_queries_sent() const { return facts_sent_; }
  // Budget lowered after a context overflow, 0 if none.
  std::size_t learned_budget() const { return learned_budget_; }

  std::string transcript_jsonl() const { return to_jsonl(messages_); }

 private:
  ChatSession(SessionConfig config, protocol::ActionRegistry registry, protocol::RobotProfile profile,
              std::shared_ptr<llm::LlmBackend> backend, Clock clock);

  std::string round(Role role, MessageTag tag, std::string text);
  void push(Role role, MessageTag tag, std::string text);
  void send_facts();
  void send_status_update();
  void place(const std::string& name);
  std::size_t effective_budget(std::size_t minimum) const;

  SessionConfig config_;
  protocol::ActionRegistry registry_;
  protocol::RobotProfile profile_;
  std::shared_ptr<llm::LlmBackend> backend_;
  Clock clock_;

  std::vector<ChatMessage> messages_;
  std::set<std::string> known_;
  std::vector<std::string> first_seen_;  // every object name in order of first appearance
  std::vector<std::string> current_;
  std::vector<std::string> last_reported_;
  std::vector<std::string> gestures_;
  std::vector<std::string> failure_notes_;
  std::vector<std::string> facts_queue_;
  std::set<std::string> facts_asked_;
  bool announce_empty_ = false;
  std::size_t facts_sent_ = 0;
  std::size_t learned_budget_ = 0;
};

// "lemon 2" -> "lemon". Perception numbers duplicate instances this way.
std::string base_object_name(std::string_view name);

}  // namespace groundbot::chat
