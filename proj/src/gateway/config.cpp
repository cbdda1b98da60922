#include "groundbot/gateway/config.hpp"

#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "groundbot/core/errors.hpp"

namespace groundbot::gateway {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + std::string(where));
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

double parse_double(const std::string& name, const std::string& s) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(name + " is not a number: " + s);
  }
}

void validate(const GatewayConfig& c) {
  if (c.port < 0 || c.port > 65535) throw ConfigError("port out of range");
  if (c.worker_threads < 1) throw ConfigError("worker_threads must be positive");
  if (c.time_scale < 0) throw ConfigError("time_scale must be non-negative");
  if (c.event_buffer == 0) throw ConfigError("event_buffer must be positive");
  if (c.max_sessions == 0) throw ConfigError("max_sessions must be positive");
  if (c.synth.base_latency < 0 || c.synth.latency_per_char < 0 || c.synth.duration_per_char < 0) {
    throw ConfigError("synth timings must be non-negative");
  }
  perception::Tracker check(c.tracker);
}

}  // namespace

std::string_view to_string(BackendKind kind) { return kind == BackendKind::live ? "live" : "scripted"; }

BackendKind backend_kind_from_string(std::string_view s) {
  if (s == "live" || s == "http") return BackendKind::live;
  if (s == "scripted") return BackendKind::scripted;
  throw ConfigError("unknown backend kind '" + std::string(s) + "'");
}

GatewayConfig parse_gateway_config(std::string_view text, GatewayConfig c) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not JSON: ") + e.what());
  }
  check_keys(j, "config", {"host", "port", "worker_threads", "backend", "fixture_dir", "session", "synth", "world",
                           "tracker", "event_buffer", "max_sessions", "ui_dir"});
  read(j, "host", c.host);
  read(j, "port", c.port);
  read(j, "worker_threads", c.worker_threads);
  read(j, "fixture_dir", c.fixture_dir);
  read(j, "event_buffer", c.event_buffer);
  read(j, "max_sessions", c.max_sessions);
  read(j, "ui_dir", c.ui_dir);
  if (j.contains("backend")) {
    const auto& b = j["backend"];
    check_keys(b, "backend",
               {"kind", "url", "api_key", "model", "temperature", "max_tokens", "timeout_s", "max_retries", "fixture"});
    if (b.contains("kind")) c.backend.kind = backend_kind_from_string(b["kind"].get<std::string>());
    read(b, "url", c.backend.http.base_url);
    read(b, "api_key", c.backend.http.api_key);
    read(b, "max_retries", c.backend.http.max_retries);
    read(b, "model", c.backend.completion.model_id);
    read(b, "temperature", c.backend.completion.temperature);
    read(b, "max_tokens", c.backend.completion.max_tokens);
    read(b, "timeout_s", c.backend.completion.timeout_s);
    read(b, "fixture", c.backend.fixture);
  }
  if (j.contains("session")) {
    const auto& s = j["session"];
    check_keys(s, "session", {"priming", "object_facts", "perception_active", "history_budget"});
    read(s, "priming", c.session.priming);
    read(s, "object_facts", c.session.object_facts);
    read(s, "perception_active", c.session.perception_active);
    read(s, "history_budget", c.session.history_budget);
  }
  if (j.contains("synth")) {
    const auto& s = j["synth"];
    check_keys(s, "synth", {"base_latency", "latency_per_char", "duration_per_char", "time_scale"});
    read(s, "base_latency", c.synth.base_latency);
    read(s, "latency_per_char", c.synth.latency_per_char);
    read(s, "duration_per_char", c.synth.duration_per_char);
    read(s, "time_scale", c.time_scale);
  }
  if (j.contains("world")) {
    const auto& w = j["world"];
    check_keys(w, "world", {"give_push", "look", "point", "give", "wait_for_motion_end"});
    read(w, "give_push", c.world.give_push);
    read(w, "look", c.world.motion.look);
    read(w, "point", c.world.motion.point);
    read(w, "give", c.world.motion.give);
    read(w, "wait_for_motion_end", c.execution.wait_for_motion_end);
  }
  if (j.contains("tracker")) {
    const auto& t = j["tracker"];
    check_keys(t, "tracker", {"iou_gate", "min_hits", "max_misses", "vote_window"});
    read(t, "iou_gate", c.tracker.iou_gate);
    read(t, "min_hits", c.tracker.min_hits);
    read(t, "max_misses", c.tracker.max_misses);
    read(t, "vote_window", c.tracker.vote_window);
  }
  validate(c);
  return c;
}

GatewayConfig load_gateway_config(const std::string& path, GatewayConfig base) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_gateway_config(ss.str(), std::move(base));
}

std::optional<std::string> process_env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

void apply_env_overrides(GatewayConfig& c, const EnvLookup& env) {
  if (auto v = env("GROUNDBOT_HOST")) c.host = *v;
  if (auto v = env("GROUNDBOT_PORT")) c.port = static_cast<int>(parse_double("GROUNDBOT_PORT", *v));
  if (auto v = env("GROUNDBOT_BACKEND")) c.backend.kind = backend_kind_from_string(*v);
  if (auto v = env("GROUNDBOT_BACKEND_URL")) c.backend.http.base_url = *v;
  if (auto v = env("GROUNDBOT_API_KEY")) {
    c.backend.http.api_key = *v;
  } else if (auto k = env("OPENAI_API_KEY"); k && c.backend.http.api_key.empty()) {
    c.backend.http.api_key = *k;
  }
  if (auto v = env("GROUNDBOT_MODEL")) c.backend.completion.model_id = *v;
  if (auto v = env("GROUNDBOT_FIXTURE_DIR")) c.fixture_dir = *v;
  if (auto v = env("GROUNDBOT_FIXTURE")) c.backend.fixture = *v;
  if (auto v = env("GROUNDBOT_TIME_SCALE")) c.time_scale = parse_double("GROUNDBOT_TIME_SCALE", *v);
  if (auto v = env("GROUNDBOT_SYNTH_BASE_LATENCY")) {
    c.synth.base_latency = parse_double("GROUNDBOT_SYNTH_BASE_LATENCY", *v);
  }
  if (auto v = env("GROUNDBOT_SYNTH_LATENCY_PER_CHAR")) {
    c.synth.latency_per_char = parse_double("GROUNDBOT_SYNTH_LATENCY_PER_CHAR", *v);
  }
  if (auto v = env("GROUNDBOT_SYNTH_DURATION_PER_CHAR")) {
    c.synth.duration_per_char = parse_double("GROUNDBOT_SYNTH_DURATION_PER_CHAR", *v);
  }
  if (auto v = env("GROUNDBOT_UI_DIR")) c.ui_dir = *v;
  if (auto v = env("GROUNDBOT_TRACKER_IOU_GATE")) c.tracker.iou_gate = parse_double("GROUNDBOT_TRACKER_IOU_GATE", *v);
  if (auto v = env("GROUNDBOT_TRACKER_MIN_HITS")) {
    c.tracker.min_hits = static_cast<int>(parse_double("GROUNDBOT_TRACKER_MIN_HITS", *v));
  }
  if (auto v = env("GROUNDBOT_TRACKER_MAX_MISSES")) {
    c.tracker.max_misses = static_cast<int>(parse_double("GROUNDBOT_TRACKER_MAX_MISSES", *v));
  }
  if (auto v = env("GROUNDBOT_TRACKER_VOTE_WINDOW")) {
    c.tracker.vote_window = static_cast<std::size_t>(parse_double("GROUNDBOT_TRACKER_VOTE_WINDOW", *v));
  }
  validate(c);
}

}  // namespace groundbot::gateway
