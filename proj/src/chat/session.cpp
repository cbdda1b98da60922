#include "groundbot/chat/session.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>

#include "groundbot/chat/history.hpp"
#include "groundbot/chat/status_update.hpp"
#include "groundbot/core/errors.hpp"
#include "groundbot/core/log.hpp"
#include "groundbot/core/text.hpp"
#include "groundbot/llm/tokenizer.hpp"

namespace groundbot::chat {

double wall_clock() {
  using namespace std::chrono;
  return duration<double>(system_clock::now().time_since_epoch()).count();
}

std::string base_object_name(std::string_view name) {
  auto t = text::trim(name);
  auto sp = t.rfind(' ');
  if (sp == std::string_view::npos || sp + 1 == t.size()) return std::string(t);
  auto suffix = t.substr(sp + 1);
  if (!std::all_of(suffix.begin(), suffix.end(), [](unsigned char c) { return std::isdigit(c); })) {
    return std::string(t);
  }
  return std::string(text::trim(t.substr(0, sp)));
}

ChatSession::ChatSession(SessionConfig config, protocol::ActionRegistry registry, protocol::RobotProfile profile,
                         std::shared_ptr<llm::LlmBackend> backend, Clock clock)
    : config_(std::move(config)),
      registry_(std::move(registry)),
      profile_(std::move(profile)),
      backend_(std::move(backend)),
      clock_(clock ? std::move(clock) : Clock(wall_clock)) {
  if (!backend_) throw PreconditionError("session needs a backend");
}

ChatSession ChatSession::start(SessionConfig config, protocol::ActionRegistry registry, protocol::RobotProfile profile,
                               std::shared_ptr<llm::LlmBackend> backend, Clock clock) {
  ChatSession s(std::move(config), std::move(registry), std::move(profile), std::move(backend), std::move(clock));
  s.push(Role::system, MessageTag::system, protocol::render_system_prompt(s.profile_, s.registry_));
  if (s.config_.priming) s.round(Role::internal_query, MessageTag::priming, protocol::render_priming_query());
  s.announce_empty_ = s.config_.perception_active;
  return s;
}

void ChatSession::push(Role role, MessageTag tag, std::string text) {
  messages_.push_back({role, std::move(text), clock_(), tag});
}

std::string ChatSession::round(Role role, MessageTag tag, std::string text) {
  push(role, tag, std::move(text));
  try {
    for (;;) {
      const std::size_t minimum = message_tokens(messages_.front()) + message_tokens(messages_.back());
      auto window = history_window(messages_, effective_budget(minimum));
      try {
        auto answer = backend_->complete(window, config_.completion);
        push(Role::assistant, tag, answer);
        return answer;
      } catch (const llm::BackendError& e) {
        if (e.kind() != llm::BackendErrorKind::context_overflow) throw;
        std::size_t sent = 0;
        for (const auto& w : window) sent += llm::count_tokens(w.content);
        std::size_t next = std::max(sent / 2, minimum);
        if (next >= sent) throw;
        log::info("context overflow, shrinking history budget to " + std::to_string(next));
        learned_budget_ = next;
      }
    }
  } catch (...) {
    messages_.pop_back();
    throw;
  }
}

std::size_t ChatSession::effective_budget(std::size_t minimum) const {
  std::size_t budget = config_.history_budget;
  if (learned_budget_ != 0) {
    // A budget learned from an overflow never blocks a later, longer minimum set.
    std::size_t learned = std::max(learned_budget_, minimum);
    budget = budget == 0 ? learned : std::min(budget, learned);
  }
  return budget;
}

void ChatSession::place(const std::string& name) {
  if (std::find(current_.begin(), current_.end(), name) != current_.end()) return;
  if (known_.insert(name).second) first_seen_.push_back(name);
  auto rank = [this](const std::string& n) {
    return std::find(first_seen_.begin(), first_seen_.end(), n) - first_seen_.begin();
  };
  auto r = rank(name);
  auto it = std::find_if(current_.begin(), current_.end(), [&](const std::string& c) { return rank(c) > r; });
  current_.insert(it, name);
}

void ChatSession::ingest_world_diff(const WorldDiff& diff) {
  for (const auto& name : diff.removed) std::erase(current_, name);
  for (const auto& name : diff.added) {
    if (text::trim(name).empty()) continue;
    place(name);
    auto base = base_object_name(name);
    if (config_.object_facts && facts_asked_.insert(base).second) facts_queue_.push_back(base);
  }
  for (const auto& g : diff.gestures) gestures_.push_back(g);
}

void ChatSession::note_action_failure(const std::string& action, const std::string& object) {
  failure_notes_.push_back(render_action_failure(action, object));
}

std::optional<std::string> ChatSession::pending_status_text() const {
  return compose_status_update(last_reported_, current_, gestures_, {failure_notes_, announce_empty_});
}

bool ChatSession::status_pending() const { return pending_status_text().has_value(); }

void ChatSession::send_facts() {
  if (facts_queue_.empty()) return;
  auto names = std::move(facts_queue_);
  facts_queue_.clear();
  try {
    round(Role::internal_query, MessageTag::object_facts, protocol::render_object_facts_query(names));
    ++facts_sent_;
  } catch (const llm::BackendError& e) {
    log::warn(std::string("object facts query skipped: ") + e.what());
  }
}

void ChatSession::send_status_update() {
  auto text = pending_status_text();
  if (!text) return;
  round(Role::internal_query, MessageTag::status_update, std::move(*text));
  last_reported_ = current_;
  gestures_.clear();
  failure_notes_.clear();
  announce_empty_ = false;
}

void ChatSession::flush() {
  send_facts();
  send_status_update();
}

protocol::ResponsePlan ChatSession::user_turn(std::string_view utterance) {
  if (text::trim(utterance).empty()) throw PreconditionError("utterance must be nonempty");
  flush();
  auto answer = round(Role::user_query, MessageTag::user_turn, protocol::render_user_prompt(profile_, utterance));
  return protocol::parse_response(answer, registry_);
}

}  // namespace groundbot::chat
