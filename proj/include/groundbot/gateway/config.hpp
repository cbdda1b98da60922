#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "groundbot/chat/session.hpp"
#include "groundbot/embodiment/executor.hpp"
#include "groundbot/embodiment/synthesizer.hpp"
#include "groundbot/embodiment/world.hpp"
#include "groundbot/llm/http_backend.hpp"
#include "groundbot/perception/tracker.hpp"

namespace groundbot::gateway {

enum class BackendKind { live, scripted };

std::string_view to_string(BackendKind kind);
// "live" (alias "http") or "scripted"; ConfigError otherwise.
BackendKind backend_kind_from_string(std::string_view s);

struct BackendConfig {
  BackendKind kind = BackendKind::live;
  llm::HttpBackendOptions http;
  llm::CompletionParams completion;
  std::string fixture;  // default scripted fixture name under fixture_dir
};

struct GatewayConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  int worker_threads = 16;
  BackendConfig backend;
  std::string fixture_dir = "data/fixtures";
  chat::SessionConfig session;  // completion is taken from backend
  embodiment::SynthConfig synth;
  double time_scale = 1.0;  // 0 plays turns instantly
  embodiment::WorldConfig world;
  embodiment::ExecutionConfig execution;
  perception::TrackerParams tracker;  // for posted detection frames
  std::size_t event_buffer = 4096;
  std::size_t max_sessions = 64;
  std::string ui_dir;  // static files served at / when set
};

// Same layout as the "gateway" section documented in the README. Unknown keys
// are a ConfigError so typos do not pass silently.
GatewayConfig parse_gateway_config(std::string_view json, GatewayConfig base = {});
GatewayConfig load_gateway_config(const std::string& path, GatewayConfig base = {});

using EnvLookup = std::function<std::optional<std::string>(const char*)>;
std::optional<std::string> process_env(const char* name);

// GROUNDBOT_HOST, GROUNDBOT_PORT, GROUNDBOT_BACKEND, GROUNDBOT_BACKEND_URL,
// GROUNDBOT_API_KEY (else OPENAI_API_KEY), GROUNDBOT_MODEL,
// GROUNDBOT_FIXTURE_DIR, GROUNDBOT_FIXTURE, GROUNDBOT_TIME_SCALE,
// GROUNDBOT_SYNTH_BASE_LATENCY, GROUNDBOT_SYNTH_LATENCY_PER_CHAR,
// GROUNDBOT_SYNTH_DURATION_PER_CHAR, GROUNDBOT_UI_DIR, GROUNDBOT_TRACKER_IOU_GATE,
// GROUNDBOT_TRACKER_MIN_HITS, GROUNDBOT_TRACKER_MAX_MISSES, GROUNDBOT_TRACKER_VOTE_WINDOW.
void apply_env_overrides(GatewayConfig& config, const EnvLookup& env = process_env);

}  // namespace groundbot::gateway
