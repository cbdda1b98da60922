#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "groundbot/gateway/config.hpp"
#include "groundbot/gateway/runtime.hpp"

namespace groundbot::gateway {

// HTTP boundary over the session runtimes:
//   POST   /sessions                    create (201, 400 bad config, 502 backend failure)
//   GET    /sessions                    list ids
//   DELETE /sessions/{id}               end a session
//   POST   /sessions/{id}/utterance     {text} -> plan and event range (404, 400, 409 while a turn runs, 502)
//   POST   /sessions/{id}/world         {op: add|remove|move, name, x?, y?}
//   POST   /sessions/{id}/gesture       {gesture}
//   GET    /sessions/{id}/state         world, robot and chat status
//   GET    /sessions/{id}/transcript    chat history as JSONL
//   GET    /sessions/{id}/events        server-sent events; resume with Last-Event-ID or ?after=N,
//                                       ?once=1 returns what is buffered and closes
//   GET    /health
class Gateway {
 public:
  // live_backend serves "live" sessions; when null one is built from the
  // config on first use.
  explicit Gateway(GatewayConfig config, std::shared_ptr<llm::LlmBackend> live_backend = nullptr,
                   chat::Clock clock = chat::wall_clock);
  ~Gateway();

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  // Binds config.host:config.port (0 picks a free port), serves on a
  // background thread and returns the bound port. Throws std::runtime_error.
  int start();
  // Binds and serves on the calling thread until stop().
  void run();
  void stop();

  int port() const;
  const GatewayConfig& config() const;
  std::shared_ptr<AgentRuntime> find(const std::string& id) const;
  std::vector<std::string> session_ids() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace groundbot::gateway
