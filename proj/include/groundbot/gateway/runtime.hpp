#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "groundbot/chat/session.hpp"
#include "groundbot/embodiment/executor.hpp"
#include "groundbot/embodiment/synthesizer.hpp"
#include "groundbot/embodiment/world.hpp"
#include "groundbot/gateway/config.hpp"
#include "groundbot/gateway/event_log.hpp"
#include "groundbot/llm/scripted_backend.hpp"
#include "groundbot/perception/tracker.hpp"

namespace groundbot::gateway {

struct InitialObject {
  std::string name;
  std::optional<embodiment::Vec2> position;  // auto-placed when absent
};

// Validated POST /sessions body.
struct SessionSpec {
  BackendKind backend = BackendKind::live;
  llm::ScriptFixture script;  // scripted only
  chat::SessionConfig chat;
  std::vector<InitialObject> objects;
  double time_scale = 1.0;
};

// Body keys: backend ("live" | "scripted"), fixture (file name under
// fixture_dir), script (inline fixture entries), model, temperature,
// max_tokens, priming, object_facts, perception_active, history_budget,
// objects ([{name, x?, y?}] or names), time_scale. Throws ConfigError.
SessionSpec parse_session_spec(const nlohmann::json& body, const GatewayConfig& config);

// Gestures the operator may inject.
const std::vector<std::string>& gesture_names();

// {"frames": [[det, ...], ...]} or {"detections": [det, ...]} for one frame,
// det = {"label", "bbox": [x, y, w, h], "score"?}. Throws ConfigError.
std::vector<std::vector<perception::Detection>> parse_detection_frames(const nlohmann::json& body);

nlohmann::json world_to_json(const embodiment::WorldView& view);
nlohmann::json plan_to_json(const protocol::ResponsePlan& plan);

struct TurnResult {
  protocol::ResponsePlan plan;
  std::uint64_t first_seq = 0;
  std::uint64_t last_seq = 0;
  std::vector<embodiment::ActionFailure> failures;
};

// One conversation: chat state, simulated world, synthesizer and event log.
// Turns are serialized; world edits and gestures are applied to the world at
// once and reach the chat session before the next round.
class AgentRuntime {
 public:
  // Starts the chat session (may call the backend) and places the initial
  // objects. Throws llm::BackendError, or PreconditionError for bad objects.
  AgentRuntime(std::string id, SessionSpec spec, std::shared_ptr<llm::LlmBackend> backend,
               const GatewayConfig& config, chat::Clock clock);
  ~AgentRuntime();

  AgentRuntime(const AgentRuntime&) = delete;
  AgentRuntime& operator=(const AgentRuntime&) = delete;

  // nullopt when a turn is already running. Backend errors propagate after a
  // TURN_ERROR event.
  std::optional<TurnResult> try_turn(std::string_view utterance);

  // Throws PreconditionError (world unchanged) for invalid edits.
  WorldDiff mutate(const embodiment::TableOp& op);
  // Places an object at the first free default slot.
  WorldDiff add_anywhere(const std::string& name);
  // Runs the frames through the session tracker and mirrors the change in its
  // confirmed object list onto the table. Returns the edits applied.
  WorldDiff detections(const std::vector<std::vector<perception::Detection>>& frames);
  // Throws PreconditionError for names outside gesture_names().
  void gesture(const std::string& name);

  nlohmann::json state();
  // Chat transcript as JSONL, nullopt while a turn is running.
  std::optional<std::string> transcript() const;

  EventLog& events() { return events_; }
  const std::string& id() const { return id_; }
  BackendKind backend_kind() const { return backend_kind_; }
  double created_at() const { return created_at_; }
  bool busy() const { return busy_.load(); }

 private:
  void publish_state();
  void queue_diff(const WorldDiff& diff);
  void drain_locked();  // requires chat_mutex_

  std::string id_;
  BackendKind backend_kind_;
  double created_at_;
  embodiment::World world_;
  embodiment::MockSynthesizer synth_;
  embodiment::ExecutionConfig execution_;
  EventLog events_;

  mutable std::mutex chat_mutex_;
  std::optional<chat::ChatSession> chat_;
  std::atomic<bool> busy_{false};

  std::mutex edit_mutex_;  // orders world edits with their events
  std::mutex pending_mutex_;
  std::vector<WorldDiff> pending_;

  std::mutex perception_mutex_;
  perception::Tracker tracker_;
  std::vector<std::string> tracked_;
};

}  // namespace groundbot::gateway
