#include "groundbot/gateway/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "groundbot/core/errors.hpp"
#include "groundbot/core/log.hpp"
#include "groundbot/protocol/prompts.hpp"

namespace groundbot::gateway {

namespace {

using nlohmann::json;

std::string_view arm_mode_name(embodiment::ArmMode m) {
  switch (m) {
    case embodiment::ArmMode::idle: return "idle";
    case embodiment::ArmMode::pointing: return "pointing";
    case embodiment::ArmMode::giving: return "giving";
  }
  return "?";
}

template <typename T>
T field(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

llm::ScriptFixture load_named_fixture(const GatewayConfig& config, const std::string& name) {
  if (name.empty() || name.find('/') != std::string::npos || name.find('\\') != std::string::npos ||
      name.find("..") != std::string::npos) {
    throw ConfigError("fixture must be a plain file name: '" + name + "'");
  }
  auto path = std::filesystem::path(config.fixture_dir) / name;
  if (!std::filesystem::is_regular_file(path)) throw ConfigError("no fixture named '" + name + "'");
  try {
    return llm::load_fixture(path.string());
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
}

struct BusyReset {
  std::atomic<bool>& flag;
  ~BusyReset() { flag.store(false); }
};

}  // namespace

SessionSpec parse_session_spec(const json& body, const GatewayConfig& config) {
  if (!body.is_object()) throw ConfigError("session body must be a JSON object");
  static const std::vector<std::string> allowed{"backend",      "fixture",        "script",   "model",
                                                "temperature",  "max_tokens",     "priming",  "object_facts",
                                                "perception_active", "history_budget", "objects", "time_scale"};
  for (const auto& [key, _] : body.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown session key '" + key + "'");
    }
  }

  SessionSpec spec;
  spec.backend = body.contains("backend") ? backend_kind_from_string(field<std::string>(body, "backend", ""))
                                          : config.backend.kind;
  if (spec.backend == BackendKind::scripted) {
    if (body.contains("script")) {
      if (!body["script"].is_array()) throw ConfigError("script must be an array of fixture entries");
      std::string lines;
      for (const auto& e : body["script"]) lines += e.dump() + "\n";
      try {
        spec.script = llm::parse_fixture(lines);
      } catch (const std::runtime_error& e) {
        throw ConfigError(e.what());
      }
    } else {
      auto name = field<std::string>(body, "fixture", config.backend.fixture);
      if (name.empty()) throw ConfigError("scripted sessions need a fixture or an inline script");
      spec.script = load_named_fixture(config, name);
    }
  } else if (body.contains("script") || body.contains("fixture")) {
    throw ConfigError("fixture and script apply to scripted sessions only");
  }

  spec.chat = config.session;
  spec.chat.completion = config.backend.completion;
  spec.chat.completion.model_id = field(body, "model", spec.chat.completion.model_id);
  spec.chat.completion.temperature = field(body, "temperature", spec.chat.completion.temperature);
  spec.chat.completion.max_tokens = field(body, "max_tokens", spec.chat.completion.max_tokens);
  spec.chat.priming = field(body, "priming", spec.chat.priming);
  spec.chat.object_facts = field(body, "object_facts", spec.chat.object_facts);
  spec.chat.perception_active = field(body, "perception_active", spec.chat.perception_active);
  spec.chat.history_budget = field(body, "history_budget", spec.chat.history_budget);
  if (spec.chat.completion.model_id.empty()) throw ConfigError("model must not be empty");
  if (spec.chat.completion.max_tokens <= 0) throw ConfigError("max_tokens must be positive");

  spec.time_scale = field(body, "time_scale", config.time_scale);
  if (spec.time_scale < 0 || !std::isfinite(spec.time_scale)) throw ConfigError("time_scale must be non-negative");

  if (body.contains("objects")) {
    if (!body["objects"].is_array()) throw ConfigError("objects must be an array");
    for (const auto& o : body["objects"]) {
      InitialObject obj;
      if (o.is_string()) {
        obj.name = o.get<std::string>();
      } else if (o.is_object()) {
        obj.name = field<std::string>(o, "name", "");
        if (o.contains("x") || o.contains("y")) {
          obj.position = embodiment::Vec2{field(o, "x", 0.0), field(o, "y", 0.0)};
        }
      } else {
        throw ConfigError("objects entries must be names or {name, x, y}");
      }
      spec.objects.push_back(std::move(obj));
    }
  }
  return spec;
}

const std::vector<std::string>& gesture_names() {
  static const std::vector<std::string> names{"wave", "grasp", "pause", "stop"};
  return names;
}

std::vector<std::vector<perception::Detection>> parse_detection_frames(const json& body) {
  if (!body.is_object()) throw ConfigError("detections body must be a JSON object");
  json frames;
  if (body.contains("frames") && !body.contains("detections")) {
    frames = body["frames"];
  } else if (body.contains("detections") && !body.contains("frames")) {
    frames = json::array({body["detections"]});
  } else {
    throw ConfigError("detections body needs exactly one of 'frames' or 'detections'");
  }
  if (!frames.is_array()) throw ConfigError("'frames' must be an array");
  std::vector<std::vector<perception::Detection>> out;
  for (const auto& frame : frames) {
    if (!frame.is_array()) throw ConfigError("each frame must be an array of detections");
    auto& dets = out.emplace_back();
    for (const auto& d : frame) {
      if (!d.is_object() || !d.contains("label") || !d.contains("bbox")) {
        throw ConfigError("a detection needs 'label' and 'bbox'");
      }
      perception::Detection det;
      det.frame = out.size() - 1;
      det.label = field<std::string>(d, "label", "");
      auto box = field<std::vector<double>>(d, "bbox", {});
      if (det.label.empty() || box.size() != 4 || box[2] <= 0 || box[3] <= 0) {
        throw ConfigError("a detection needs a label and a bbox [x, y, w, h] with positive size");
      }
      det.bbox = {box[0], box[1], box[2], box[3]};
      det.score = field<double>(d, "score", 1.0);
      dets.push_back(std::move(det));
    }
  }
  return out;
}

json world_to_json(const embodiment::WorldView& view) {
  json objects = json::array();
  for (const auto& o : view.objects) objects.push_back({{"name", o.name}, {"x", o.position.x}, {"y", o.position.y}});
  json robot{{"expression", view.robot.expression},
             {"gaze_target", view.robot.gaze_target ? json(*view.robot.gaze_target) : json()},
             {"arm", {{"mode", arm_mode_name(view.robot.arm.mode)}, {"target", view.robot.arm.target}}}};
  return {{"version", view.version},
          {"bounds",
           {{"x_min", view.bounds.x_min},
            {"x_max", view.bounds.x_max},
            {"y_min", view.bounds.y_min},
            {"y_max", view.bounds.y_max}}},
          {"objects", objects},
          {"robot", robot}};
}

json plan_to_json(const protocol::ResponsePlan& plan) {
  json segments = json::array();
  for (const auto& s : plan.segments) {
    json j{{"kind", protocol::to_string(s.kind)}};
    if (s.kind == protocol::SegmentKind::action) {
      j["action"] = s.call.action;
      j["argument"] = s.call.argument;
      j["raw"] = s.call.raw_text;
    } else {
      j["text"] = s.text;
    }
    segments.push_back(std::move(j));
  }
  json anomalies = json::array();
  for (const auto& a : plan.anomalies) {
    json reasons = json::array();
    for (auto r : a.reasons) reasons.push_back(protocol::to_string(r));
    anomalies.push_back({{"raw", a.raw_text}, {"reasons", reasons}, {"position", a.position}});
  }
  return {{"segments", segments}, {"anomalies", anomalies}};
}

AgentRuntime::AgentRuntime(std::string id, SessionSpec spec, std::shared_ptr<llm::LlmBackend> backend,
                           const GatewayConfig& config, chat::Clock clock)
    : id_(std::move(id)),
      backend_kind_(spec.backend),
      created_at_(clock()),
      world_(config.world),
      synth_(config.synth, spec.time_scale),
      execution_(config.execution),
      events_(config.event_buffer),
      tracker_(config.tracker) {
  chat_.emplace(chat::ChatSession::start(spec.chat, protocol::default_registry(), protocol::nicol_profile(),
                                         std::move(backend), std::move(clock)));
  events_.append("SESSION_STARTED",
                 json{{"id", id_}, {"backend", to_string(backend_kind_)}, {"created_at", created_at_}}.dump());
  for (const auto& o : spec.objects) {
    if (o.position) {
      mutate(embodiment::TableOp::add(o.name, *o.position));
    } else {
      add_anywhere(o.name);
    }
  }
}

AgentRuntime::~AgentRuntime() { events_.close(); }

void AgentRuntime::publish_state() {
  events_.append("STATE", world_to_json(world_.snapshot()).dump());
}

void AgentRuntime::drain_locked() {
  std::vector<WorldDiff> diffs;
  {
    std::lock_guard lock(pending_mutex_);
    diffs.swap(pending_);
  }
  for (const auto& d : diffs) chat_->ingest_world_diff(d);
}

void AgentRuntime::queue_diff(const WorldDiff& diff) {
  {
    std::lock_guard lock(pending_mutex_);
    pending_.push_back(diff);
  }
  // Apply now when no turn holds the session; otherwise the next round does.
  std::unique_lock lock(chat_mutex_, std::try_to_lock);
  if (lock.owns_lock()) drain_locked();
}

WorldDiff AgentRuntime::mutate(const embodiment::TableOp& op) {
  WorldDiff diff;
  {
    std::lock_guard lock(edit_mutex_);
    diff = world_.mutate(op);
    static constexpr std::string_view kOps[] = {"add", "remove", "move"};
    json payload{{"op", kOps[static_cast<int>(op.kind)]},
                 {"name", op.name},
                 {"added", diff.added},
                 {"removed", diff.removed}};
    if (op.kind != embodiment::TableOp::Kind::remove) {
      payload["x"] = op.position.x;
      payload["y"] = op.position.y;
    }
    events_.append("WORLD_DIFF", payload.dump());
    publish_state();
  }
  if (!diff.empty()) queue_diff(diff);
  return diff;
}

WorldDiff AgentRuntime::add_anywhere(const std::string& name) {
  auto view = world_.snapshot();
  const auto& b = view.bounds;
  // Rows across the middle of the table, nearest the robot first.
  for (double fy : {0.375, 0.5625, 0.1875, 0.75}) {
    for (int k = 0; k < 7; ++k) {
      embodiment::Vec2 p{b.x_min + (b.x_max - b.x_min) * (k + 1) / 8.0, b.y_min + (b.y_max - b.y_min) * fy};
      bool free = std::all_of(view.objects.begin(), view.objects.end(), [&](const embodiment::TableObject& o) {
        return std::hypot(o.position.x - p.x, o.position.y - p.y) >= 0.1;
      });
      if (free) return mutate(embodiment::TableOp::add(name, p));
    }
  }
  return mutate(embodiment::TableOp::add(name, {(b.x_min + b.x_max) / 2, (b.y_min + b.y_max) / 2}));
}

WorldDiff AgentRuntime::detections(const std::vector<std::vector<perception::Detection>>& frames) {
  std::lock_guard lock(perception_mutex_);
  for (const auto& f : frames) tracker_.update(f);
  auto current = perception::object_list(tracker_.tracks());
  auto change = perception::world_diff(tracked_, current);
  tracked_ = std::move(current);
  // Operator edits may already have applied part of the change.
  WorldDiff applied;
  for (const auto& name : change.removed) {
    if (!world_.snapshot().find(name)) continue;
    auto d = mutate(embodiment::TableOp::remove(name));
    applied.removed.insert(applied.removed.end(), d.removed.begin(), d.removed.end());
  }
  for (const auto& name : change.added) {
    if (world_.snapshot().find(name)) continue;
    auto d = add_anywhere(name);
    applied.added.insert(applied.added.end(), d.added.begin(), d.added.end());
  }
  return applied;
}

void AgentRuntime::gesture(const std::string& name) {
  const auto& names = gesture_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw PreconditionError("unknown gesture '" + name + "'");
  }
  {
    std::lock_guard lock(edit_mutex_);
    events_.append("GESTURE", json{{"gesture", name}}.dump());
  }
  queue_diff(WorldDiff{{}, {}, {name}});
}

std::optional<TurnResult> AgentRuntime::try_turn(std::string_view utterance) {
  bool expected = false;
  if (!busy_.compare_exchange_strong(expected, true)) return std::nullopt;
  BusyReset reset{busy_};
  std::lock_guard lock(chat_mutex_);
  drain_locked();

  TurnResult result;
  result.first_seq = events_.append("TURN_START", json{{"utterance", utterance}}.dump());
  try {
    result.plan = chat_->user_turn(utterance);
  } catch (const llm::BackendError& e) {
    events_.append("TURN_ERROR", json{{"kind", llm::to_string(e.kind())},
                                      {"status", e.status()},
                                      {"message", e.what()},
                                      {"body", e.body()}}
                                     .dump());
    throw;
  }
  events_.append("PLAN", plan_to_json(result.plan).dump());

  auto sink = [this](const embodiment::ExecutionEvent& e) {
    std::lock_guard edit(edit_mutex_);
    events_.append(std::string(embodiment::to_string(e.kind)), embodiment::event_to_json(e));
    if (e.kind == embodiment::EventKind::action_start || e.kind == embodiment::EventKind::action_end) {
      publish_state();
    }
  };
  auto exec = embodiment::execute_plan(result.plan, world_, synth_, sink, execution_);
  result.failures = exec.failures;

  json failures = json::array();
  for (const auto& f : exec.failures) {
    chat_->note_action_failure(f.action, f.object);
    failures.push_back({{"action", f.action}, {"object", f.object}});
  }
  result.last_seq = events_.append("TURN_END", json{{"failures", failures}}.dump());
  return result;
}

json AgentRuntime::state() {
  json chat;  // null while a turn runs
  {
    std::unique_lock lock(chat_mutex_, std::try_to_lock);
    if (lock.owns_lock()) {
      drain_locked();
      auto pending = chat_->pending_status_text();
      chat = {{"messages", chat_->messages().size()},
              {"current_objects", chat_->current_objects()},
              {"last_reported_objects", chat_->last_reported_objects()},
              {"pending_gestures", chat_->pending_gestures()},
              {"status_pending", chat_->status_pending()},
              {"pending_status", pending ? json(*pending) : json()}};
    }
  }
  return {{"id", id_},
          {"backend", to_string(backend_kind_)},
          {"created_at", created_at_},
          {"busy", busy()},
          {"last_seq", events_.last_seq()},
          {"world", world_to_json(world_.snapshot())},
          {"chat", chat}};
}

std::optional<std::string> AgentRuntime::transcript() const {
  std::unique_lock lock(chat_mutex_, std::try_to_lock);
  if (!lock.owns_lock()) return std::nullopt;
  return chat_->transcript_jsonl();
}

}  // namespace groundbot::gateway
