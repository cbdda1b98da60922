#include "groundbot/embodiment/executor.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

#include <json.hpp>

#include "groundbot/protocol/sentences.hpp"

namespace groundbot::embodiment {

using protocol::SegmentKind;

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::utterance_start: return "UTTERANCE_START";
    case EventKind::utterance_end: return "UTTERANCE_END";
    case EventKind::action_start: return "ACTION_START";
    case EventKind::action_end: return "ACTION_END";
    case EventKind::anomaly_filtered: return "ANOMALY_FILTERED";
  }
  return "?";
}

namespace {

using SteadyClock = std::chrono::steady_clock;

class Player {
 public:
  Player(World& world, double scale, const EventSink& sink, ExecutionResult& out)
      : world_(world), scale_(scale), sink_(sink), out_(out), origin_(SteadyClock::now()) {}

  // Emits an event at simulated time t, first releasing any deferred motion
  // ends that fall before it.
  void emit(ExecutionEvent ev) {
    flush(ev.timestamp);
    deliver(std::move(ev));
  }

  void defer(ExecutionEvent ev) {
    deferred_.push_back(std::move(ev));
    std::stable_sort(deferred_.begin(), deferred_.end(),
                     [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  }

  void flush(double until) {
    while (!deferred_.empty() && deferred_.front().timestamp <= until) {
      auto ev = std::move(deferred_.front());
      deferred_.erase(deferred_.begin());
      deliver(std::move(ev));
    }
  }

  void flush_all() { flush(std::numeric_limits<double>::infinity()); }

 private:
  void deliver(ExecutionEvent ev) {
    if (scale_ > 0) std::this_thread::sleep_until(origin_ + std::chrono::duration_cast<SteadyClock::duration>(
                                                                 std::chrono::duration<double>(ev.timestamp * scale_)));
    if (ev.kind == EventKind::action_end && ev.error.empty()) world_.finish_action(ev.call);
    if (sink_) sink_(ev);
    out_.events.push_back(std::move(ev));
  }

  World& world_;
  double scale_;
  const EventSink& sink_;
  ExecutionResult& out_;
  SteadyClock::time_point origin_;
  std::vector<ExecutionEvent> deferred_;
};

}  // namespace

ExecutionResult execute_plan(const protocol::ResponsePlan& plan, World& world, const MockSynthesizer& synth,
                             const EventSink& sink, ExecutionConfig config) {
  // Pre-cache every sentence of the whole answer before anything plays.
  std::vector<std::vector<UtteranceHandle>> handles(plan.segments.size());
  for (std::size_t i = 0; i < plan.segments.size(); ++i) {
    if (plan.segments[i].kind != SegmentKind::say) continue;
    for (auto& sentence : protocol::split_sentences(plan.segments[i].text)) {
      handles[i].push_back(synth.synth(std::move(sentence)));
    }
  }

  ExecutionResult result;
  Player player(world, synth.time_scale(), sink, result);
  double t = 0.0;
  std::size_t next_anomaly = 0;
  auto anomalies_before = [&](std::size_t position) {
    while (next_anomaly < plan.anomalies.size() && plan.anomalies[next_anomaly].position <= position) {
      const auto& a = plan.anomalies[next_anomaly++];
      ExecutionEvent ev{EventKind::anomaly_filtered, t, a.position, a.raw_text, {}, {}, {}};
      for (auto r : a.reasons) ev.reasons.emplace_back(protocol::to_string(r));
      player.emit(std::move(ev));
    }
  };

  for (std::size_t i = 0; i < plan.segments.size(); ++i) {
    anomalies_before(i);
    const auto& seg = plan.segments[i];
    if (seg.kind == SegmentKind::thought) continue;
    if (seg.kind == SegmentKind::say) {
      for (auto& h : handles[i]) {
        double start = std::max(t, h.latency);
        player.flush(start);
        h.ready.wait();
        h.state->store(SynthState::playing);
        player.emit({EventKind::utterance_start, start, i, h.sentence, {}, {}, {}});
        t = start + h.duration;
        player.emit({EventKind::utterance_end, t, i, h.sentence, {}, {}, {}});
        h.state->store(SynthState::done);
      }
      continue;
    }

    player.flush(t);
    ActionEffect effect;
    std::string error;
    try {
      effect = world.apply_action(seg.call);
    } catch (const ActionError& e) {
      error = std::string(to_string(e.kind()));
      result.failures.push_back({e.action(), e.object()});
    }
    player.emit({EventKind::action_start, t, i, {}, seg.call, {}, {}});
    ExecutionEvent end{EventKind::action_end, t + effect.duration, i, {}, seg.call, error, {}};
    if (!effect.blocking || config.wait_for_motion_end) {
      t = end.timestamp;
      player.emit(std::move(end));
    } else {
      player.defer(std::move(end));
    }
  }
  anomalies_before(plan.segments.size());
  player.flush_all();
  return result;
}

std::string event_to_json(const ExecutionEvent& e) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(e.kind);
  j["timestamp"] = e.timestamp;
  j["segment"] = e.segment;
  if (!e.text.empty()) j["text"] = e.text;
  if (e.kind == EventKind::action_start || e.kind == EventKind::action_end) {
    j["action"] = e.call.action;
    j["argument"] = e.call.argument;
  }
  if (!e.error.empty()) j["error"] = e.error;
  if (!e.reasons.empty()) j["reasons"] = e.reasons;
  return j.dump();
}

std::string events_to_jsonl(const std::vector<ExecutionEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    out += event_to_json(e);
    out += '\n';
  }
  return out;
}

}  // namespace groundbot::embodiment
