#include "groundbot/core/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace groundbot::log {
namespace {

Level from_env() {
  const char* v = std::getenv("GROUNDBOT_LOG");
  if (!v) return Level::warn;
  std::string s(v);
  if (s == "debug") return Level::debug;
  if (s == "info") return Level::info;
  if (s == "error") return Level::error;
  if (s == "off") return Level::off;
  return Level::warn;
}

std::atomic<Level>& threshold() {
  static std::atomic<Level> t{from_env()};
  return t;
}

const char* label(Level l) {
  switch (l) {
    case Level::debug: return "debug";
    case Level::info: return "info";
    case Level::warn: return "warn";
    case Level::error: return "error";
    case Level::off: break;
  }
  return "";
}

}  // namespace

void set_level(Level level) { threshold() = level; }
Level level() { return threshold(); }

void write(Level l, std::string_view message) {
  if (l == Level::off || l < threshold().load()) return;
  static std::mutex m;
  std::lock_guard lock(m);
  std::cerr << "[groundbot " << label(l) << "] " << message << '\n';
}

}  // namespace groundbot::log
