#include "groundbot/llm/scripted_backend.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "groundbot/core/text.hpp"

namespace groundbot::llm {

namespace {

std::string_view match_name(MatchKind k) { return k == MatchKind::exact ? "exact" : "normalized-prefix"; }

std::string excerpt(std::string_view s, std::size_t n = 160) {
  if (s.size() <= n) return std::string(s);
  return std::string(s.substr(0, n)) + "...";
}

}  // namespace

bool fixture_matches(const FixtureEntry& entry, std::string_view final_message) {
  if (entry.match == MatchKind::exact) return entry.prompt == final_message;
  return text::normalize(final_message).starts_with(text::normalize(entry.prompt));
}

ScriptFixture parse_fixture(std::string_view jsonl) {
  ScriptFixture out;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      FixtureEntry e;
      auto kind = j.value("match_kind", std::string("normalized-prefix"));
      if (kind == "exact") {
        e.match = MatchKind::exact;
      } else if (kind != "normalized-prefix") {
        throw std::runtime_error("unknown match_kind '" + kind + "'");
      }
      e.prompt = j.value("prompt", std::string());
      e.response = j.at("response").get<std::string>();
      out.push_back(std::move(e));
    } catch (const std::exception& ex) {
      throw std::runtime_error("fixture line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

ScriptFixture load_fixture(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open fixture " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_fixture(ss.str());
}

std::string serialize_fixture(const ScriptFixture& fixture) {
  std::string out;
  for (const auto& e : fixture) {
    nlohmann::json j{{"match_kind", match_name(e.match)}, {"prompt", e.prompt}, {"response", e.response}};
    out += j.dump() + "\n";
  }
  return out;
}

std::string ScriptedBackend::complete(std::span<const WireMessage> messages, const CompletionParams&) {
  check_messages(messages);
  std::lock_guard lock(mutex_);
  if (next_ >= fixture_.size()) {
    throw BackendError(BackendErrorKind::fixture_exhausted,
                       "fixture exhausted after " + std::to_string(fixture_.size()) + " entries; got '" +
                           excerpt(messages.back().content) + "'");
  }
  const auto& entry = fixture_[next_];
  const auto& actual = messages.back().content;
  if (!fixture_matches(entry, actual)) {
    throw BackendError(BackendErrorKind::fixture_mismatch,
                       "fixture entry " + std::to_string(next_) + " (" + std::string(match_name(entry.match)) +
                           ") expected '" + excerpt(entry.prompt) + "' but got '" + excerpt(actual) + "'");
  }
  ++next_;
  return rtrim(entry.response);
}

std::size_t ScriptedBackend::consumed() const {
  std::lock_guard lock(mutex_);
  return next_;
}

std::size_t ScriptedBackend::remaining() const {
  std::lock_guard lock(mutex_);
  return fixture_.size() - next_;
}

}  // namespace groundbot::llm
