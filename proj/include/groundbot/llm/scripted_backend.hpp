#pragma once

#include <cstddef>
#include <mutex>
#include <string>
#include <vector>

#include "groundbot/llm/backend.hpp"

namespace groundbot::llm {

enum class MatchKind { exact, normalized_prefix };

struct FixtureEntry {
  MatchKind match = MatchKind::normalized_prefix;
  std::string prompt;    // expected final message (or its prefix)
  std::string response;  // assistant answer to return
};

using ScriptFixture = std::vector<FixtureEntry>;

bool fixture_matches(const FixtureEntry& entry, std::string_view final_message);

// Line-delimited records {match_kind, prompt, response}. match_kind defaults to
// "normalized-prefix". Throws std::runtime_error naming the bad line.
ScriptFixture parse_fixture(std::string_view jsonl);
ScriptFixture load_fixture(const std::string& path);
std::string serialize_fixture(const ScriptFixture& fixture);

// Replays a fixture strictly in order; each entry answers exactly one call.
class ScriptedBackend : public LlmBackend {
 public:
  explicit ScriptedBackend(ScriptFixture fixture) : fixture_(std::move(fixture)) {}

  std::string complete(std::span<const WireMessage> messages, const CompletionParams& params) override;

  std::size_t consumed() const;
  std::size_t remaining() const;

 private:
  mutable std::mutex mutex_;
  ScriptFixture fixture_;
  std::size_t next_ = 0;
};

}  // namespace groundbot::llm
