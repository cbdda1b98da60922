#include "groundbot/gateway/server.hpp"

#include <chrono>
#include <iomanip>
#include <map>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "groundbot/core/errors.hpp"
#include "groundbot/core/log.hpp"
#include "groundbot/core/text.hpp"
#include "groundbot/llm/http_backend.hpp"

namespace groundbot::gateway {

namespace {

using nlohmann::json;

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response& res, int status, std::string_view message) {
  reply(res, status, json{{"error", message}});
}

json backend_error_json(const llm::BackendError& e) {
  return {{"error", e.what()}, {"kind", llm::to_string(e.kind())}, {"status", e.status()}, {"body", e.body()}};
}

// Empty bodies read as {}. Returns false after answering 400.
bool parse_body(const httplib::Request& req, httplib::Response& res, json& out) {
  if (text::trim(req.body).empty()) {
    out = json::object();
    return true;
  }
  try {
    out = json::parse(req.body);
  } catch (const json::exception& e) {
    fail(res, 400, std::string("body is not JSON: ") + e.what());
    return false;
  }
  if (!out.is_object()) {
    fail(res, 400, "body must be a JSON object");
    return false;
  }
  return true;
}

std::uint64_t parse_cursor(const std::string& s) {
  try {
    std::size_t used = 0;
    auto v = std::stoull(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw PreconditionError("bad event cursor '" + s + "'");
}

}  // namespace

struct Gateway::Impl {
  GatewayConfig config;
  std::shared_ptr<llm::LlmBackend> live;
  std::mutex live_mutex;
  chat::Clock clock;

  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<bool> stopping{false};

  mutable std::shared_mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<AgentRuntime>> sessions;
  std::uint64_t counter = 0;
  std::mt19937_64 rng{std::random_device{}()};

  Impl(GatewayConfig c, std::shared_ptr<llm::LlmBackend> l, chat::Clock k)
      : config(std::move(c)), live(std::move(l)), clock(std::move(k)) {
    routes();
  }

  std::shared_ptr<llm::LlmBackend> live_backend() {
    std::lock_guard lock(live_mutex);
    if (!live) live = std::make_shared<llm::HttpChatBackend>(config.backend.http);
    return live;
  }

  std::shared_ptr<AgentRuntime> find(const std::string& id) const {
    std::shared_lock lock(sessions_mutex);
    auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }

  std::shared_ptr<AgentRuntime> session_or_404(const httplib::Request& req, httplib::Response& res) const {
    auto rt = find(req.path_params.at("id"));
    if (!rt) fail(res, 404, "unknown session '" + req.path_params.at("id") + "'");
    return rt;
  }

  std::string next_id() {
    std::lock_guard lock(sessions_mutex);
    std::ostringstream ss;
    ss << 's' << std::setw(4) << std::setfill('0') << ++counter << '-' << std::hex << std::setw(8)
       << (rng() & 0xffffffffULL);
    return ss.str();
  }

  void create_session(const httplib::Request& req, httplib::Response& res) {
    json body;
    if (!parse_body(req, res, body)) return;
    SessionSpec spec;
    try {
      spec = parse_session_spec(body, config);
    } catch (const ConfigError& e) {
      return fail(res, 400, e.what());
    }
    {
      std::shared_lock lock(sessions_mutex);
      if (sessions.size() >= config.max_sessions) return fail(res, 503, "session limit reached");
    }
    std::shared_ptr<llm::LlmBackend> backend;
    if (spec.backend == BackendKind::live) {
      backend = live_backend();
    } else {
      backend = std::make_shared<llm::ScriptedBackend>(spec.script);
    }
    auto id = next_id();
    std::shared_ptr<AgentRuntime> rt;
    try {
      rt = std::make_shared<AgentRuntime>(id, std::move(spec), backend, config, clock);
    } catch (const llm::BackendError& e) {
      log::warn("session start failed: " + std::string(e.what()));
      return reply(res, 502, backend_error_json(e));
    } catch (const PreconditionError& e) {
      return fail(res, 400, e.what());
    }
    {
      std::lock_guard lock(sessions_mutex);
      sessions[id] = rt;
    }
    log::info("session " + id + " created (" + std::string(to_string(rt->backend_kind())) + ")");
    reply(res, 201,
          json{{"id", id},
               {"created_at", rt->created_at()},
               {"backend", to_string(rt->backend_kind())},
               {"state", rt->state()}});
  }

  void utterance(const httplib::Request& req, httplib::Response& res) {
    auto rt = session_or_404(req, res);
    if (!rt) return;
    json body;
    if (!parse_body(req, res, body)) return;
    if (!body.contains("text") || !body["text"].is_string()) return fail(res, 400, "text is required");
    auto text = body["text"].get<std::string>();
    if (text::trim(text).empty()) return fail(res, 400, "text must not be empty");
    try {
      auto turn = rt->try_turn(text);
      if (!turn) return fail(res, 409, "a turn is already in progress");
      json failures = json::array();
      for (const auto& f : turn->failures) failures.push_back({{"action", f.action}, {"object", f.object}});
      reply(res, 200,
            json{{"plan", plan_to_json(turn->plan)},
                 {"first_seq", turn->first_seq},
                 {"last_seq", turn->last_seq},
                 {"failures", failures},
                 {"events", "/sessions/" + rt->id() + "/events?after=" + std::to_string(turn->first_seq - 1)}});
    } catch (const llm::BackendError& e) {
      reply(res, 502, backend_error_json(e));
    }
  }

  void world(const httplib::Request& req, httplib::Response& res) {
    auto rt = session_or_404(req, res);
    if (!rt) return;
    json body;
    if (!parse_body(req, res, body)) return;
    try {
      auto op = body.value("op", std::string());
      auto name = body.value("name", std::string());
      bool has_pos = body.contains("x") && body.contains("y");
      embodiment::Vec2 pos{has_pos ? body["x"].get<double>() : 0.0, has_pos ? body["y"].get<double>() : 0.0};
      WorldDiff diff;
      if (op == "add") {
        diff = has_pos ? rt->mutate(embodiment::TableOp::add(name, pos)) : rt->add_anywhere(name);
      } else if (op == "remove") {
        diff = rt->mutate(embodiment::TableOp::remove(name));
      } else if (op == "move") {
        if (!has_pos) return fail(res, 400, "move needs x and y");
        diff = rt->mutate(embodiment::TableOp::move(name, pos));
      } else {
        return fail(res, 400, "op must be add, remove or move");
      }
      reply(res, 200, json{{"added", diff.added}, {"removed", diff.removed}, {"state", rt->state()}});
    } catch (const PreconditionError& e) {
      fail(res, 400, e.what());
    } catch (const json::exception& e) {
      fail(res, 400, e.what());
    }
  }

  void gesture(const httplib::Request& req, httplib::Response& res) {
    auto rt = session_or_404(req, res);
    if (!rt) return;
    json body;
    if (!parse_body(req, res, body)) return;
    if (!body.contains("gesture") || !body["gesture"].is_string()) return fail(res, 400, "gesture is required");
    try {
      rt->gesture(text::to_lower(body["gesture"].get<std::string>()));
    } catch (const PreconditionError& e) {
      return fail(res, 400, e.what());
    }
    reply(res, 200, json{{"state", rt->state()}});
  }

  void detections(const httplib::Request& req, httplib::Response& res) {
    auto rt = session_or_404(req, res);
    if (!rt) return;
    json body;
    if (!parse_body(req, res, body)) return;
    try {
      auto diff = rt->detections(parse_detection_frames(body));
      reply(res, 200, json{{"added", diff.added}, {"removed", diff.removed}, {"state", rt->state()}});
    } catch (const ConfigError& e) {
      fail(res, 400, e.what());
    } catch (const PreconditionError& e) {
      fail(res, 400, e.what());
    }
  }

  void events(const httplib::Request& req, httplib::Response& res) {
    auto rt = session_or_404(req, res);
    if (!rt) return;
    std::uint64_t after = 0;
    try {
      if (req.has_header("Last-Event-ID")) {
        after = parse_cursor(req.get_header_value("Last-Event-ID"));
      } else if (req.has_param("after")) {
        after = parse_cursor(req.get_param_value("after"));
      }
    } catch (const PreconditionError& e) {
      return fail(res, 400, e.what());
    }
    bool once = req.get_param_value("once") == "1";
    auto cursor = std::make_shared<std::uint64_t>(after);
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream", [this, rt, cursor, once](std::size_t, httplib::DataSink& sink) {
          auto batch = once ? rt->events().since(*cursor) : rt->events().wait(*cursor, std::chrono::seconds(1));
          std::string out;
          if (batch.missed > 0) {
            out += "event: GAP\ndata: " + json{{"seq", 0}, {"kind", "GAP"}, {"payload", {{"missed", batch.missed}}}, {"ts", clock()}}.dump() +
                   "\n\n";
          }
          for (const auto& e : batch.events) {
            out += e.to_sse();
            *cursor = e.seq;
          }
          if (out.empty() && !once) out = ": keep-alive\n\n";
          if (!out.empty() && !sink.write(out.data(), out.size())) return false;
          if (once || stopping.load() || (batch.events.empty() && rt->events().closed())) sink.done();
          return true;
        });
  }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type, Last-Event-ID");
      res.status = 204;
    });
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string what = "internal error";
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        what = e.what();
      } catch (...) {
      }
      log::error("request failed: " + what);
      fail(res, 500, what);
    });
    server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
      log::debug(req.method + " " + req.path + " -> " + std::to_string(res.status));
    });
    server.new_task_queue = [n = config.worker_threads] { return new httplib::ThreadPool(n); };

    server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
      std::shared_lock lock(sessions_mutex);
      reply(res, 200, json{{"ok", true}, {"sessions", sessions.size()}});
    });
    server.Post("/sessions", [this](const auto& req, auto& res) { create_session(req, res); });
    server.Get("/sessions", [this](const httplib::Request&, httplib::Response& res) {
      json ids = json::array();
      std::shared_lock lock(sessions_mutex);
      for (const auto& [id, _] : sessions) ids.push_back(id);
      reply(res, 200, json{{"sessions", ids}});
    });
    server.Delete("/sessions/:id", [this](const httplib::Request& req, httplib::Response& res) {
      std::shared_ptr<AgentRuntime> rt;
      {
        std::lock_guard lock(sessions_mutex);
        auto it = sessions.find(req.path_params.at("id"));
        if (it == sessions.end()) return fail(res, 404, "unknown session");
        rt = it->second;
        sessions.erase(it);
      }
      rt->events().close();
      res.status = 204;
    });
    server.Post("/sessions/:id/utterance", [this](const auto& req, auto& res) { utterance(req, res); });
    server.Post("/sessions/:id/world", [this](const auto& req, auto& res) { world(req, res); });
    server.Post("/sessions/:id/gesture", [this](const auto& req, auto& res) { gesture(req, res); });
    server.Post("/sessions/:id/detections", [this](const auto& req, auto& res) { detections(req, res); });
    server.Get("/sessions/:id/state", [this](const httplib::Request& req, httplib::Response& res) {
      if (auto rt = session_or_404(req, res)) reply(res, 200, rt->state());
    });
    server.Get("/sessions/:id/transcript", [this](const httplib::Request& req, httplib::Response& res) {
      auto rt = session_or_404(req, res);
      if (!rt) return;
      auto t = rt->transcript();
      if (!t) return fail(res, 409, "a turn is in progress");
      res.set_content(*t, "application/x-ndjson");
    });
    server.Get("/sessions/:id/events", [this](const auto& req, auto& res) { events(req, res); });

    if (!config.ui_dir.empty() && !server.set_mount_point("/", config.ui_dir)) {
      log::warn("ui_dir " + config.ui_dir + " is not a directory; UI not served");
    }
  }

  int bind() {
    int p = config.port == 0 ? server.bind_to_any_port(config.host) : config.port;
    if (config.port != 0 && !server.bind_to_port(config.host, config.port)) p = -1;
    if (p < 0) throw std::runtime_error("cannot bind " + config.host + ":" + std::to_string(config.port));
    port = p;
    return p;
  }

  void close_logs() {
    std::shared_lock lock(sessions_mutex);
    for (const auto& [_, rt] : sessions) rt->events().close();
  }
};

Gateway::Gateway(GatewayConfig config, std::shared_ptr<llm::LlmBackend> live_backend, chat::Clock clock)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(live_backend), std::move(clock))) {}

Gateway::~Gateway() { stop(); }

int Gateway::start() {
  int p = impl_->bind();
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  log::info("gateway listening on " + impl_->config.host + ":" + std::to_string(p));
  return p;
}

void Gateway::run() {
  int p = impl_->bind();
  log::info("gateway listening on " + impl_->config.host + ":" + std::to_string(p));
  impl_->server.listen_after_bind();
}

void Gateway::stop() {
  if (impl_->stopping.exchange(true)) return;
  impl_->close_logs();
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int Gateway::port() const { return impl_->port; }
const GatewayConfig& Gateway::config() const { return impl_->config; }
std::shared_ptr<AgentRuntime> Gateway::find(const std::string& id) const { return impl_->find(id); }

std::vector<std::string> Gateway::session_ids() const {
  std::shared_lock lock(impl_->sessions_mutex);
  std::vector<std::string> out;
  for (const auto& [id, _] : impl_->sessions) out.push_back(id);
  return out;
}

}  // namespace groundbot::gateway
