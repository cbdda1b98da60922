#pragma once

#include <optional>
#include <string>
#include <vector>

namespace groundbot::chat {

struct StatusExtras {
  std::vector<std::string> failure_notes;  // already-rendered sentences
  bool announce_empty = false;             // allow the no-objects variant for [] -> []
};

// One variant line chosen from (prev, curr), then one sentence per gesture,
// then failure notes, then the acknowledge instruction, joined by '\n'.
// Returns nullopt when nothing changed and there is nothing else to say.
std::optional<std::string> compose_status_update(const std::vector<std::string>& prev,
                                                 const std::vector<std::string>& curr,
                                                 const std::vector<std::string>& gestures,
                                                 const StatusExtras& extras = {});

std::string render_action_failure(const std::string& action, const std::string& object);

}  // namespace groundbot::chat
