#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "groundbot/embodiment/synthesizer.hpp"
#include "groundbot/embodiment/world.hpp"
#include "groundbot/protocol/parser.hpp"

namespace groundbot::embodiment {

enum class EventKind { utterance_start, utterance_end, action_start, action_end, anomaly_filtered };

std::string_view to_string(EventKind kind);

struct ExecutionEvent {
  EventKind kind = EventKind::utterance_start;
  double timestamp = 0.0;      // simulated seconds since the plan started
  std::size_t segment = 0;     // plan segment index (segment count for trailing anomalies)
  std::string text;            // sentence, or raw anomaly text
  protocol::ActionCall call;   // for action events
  std::string error;           // action_end of a failed action
  std::vector<std::string> reasons;  // anomaly reasons

  bool operator==(const ExecutionEvent&) const = default;
};

struct ActionFailure {
  std::string action;
  std::string object;
  bool operator==(const ActionFailure&) const = default;
};

struct ExecutionResult {
  std::vector<ExecutionEvent> events;
  std::vector<ActionFailure> failures;
};

struct ExecutionConfig {
  // Speech after look/point/give waits for the motion to finish rather than
  // only for it to start.
  bool wait_for_motion_end = true;
};

using EventSink = std::function<void(const ExecutionEvent&)>;

// Plays a plan: every sentence is handed to the synthesizer up front, then
// segments run in plan order. Timestamps follow the latency and motion models
// exactly; the sink is called in real time (scaled by the synthesizer's
// time_scale) as each event happens. Action errors become events and the
// plan continues.
ExecutionResult execute_plan(const protocol::ResponsePlan& plan, World& world, const MockSynthesizer& synth,
                             const EventSink& sink = {}, ExecutionConfig config = {});

// One JSON object per line: {kind, timestamp, segment, ...}.
std::string events_to_jsonl(const std::vector<ExecutionEvent>& events);
std::string event_to_json(const ExecutionEvent& event);

}  // namespace groundbot::embodiment
