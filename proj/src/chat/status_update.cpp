#include "groundbot/chat/status_update.hpp"

#include "groundbot/core/text.hpp"
#include "groundbot/protocol/prompts.hpp"

namespace groundbot::chat {

using protocol::bracket_list;
using protocol::prompt_asset;
using protocol::render_template;

std::optional<std::string> compose_status_update(const std::vector<std::string>& prev,
                                                 const std::vector<std::string>& curr,
                                                 const std::vector<std::string>& gestures,
                                                 const StatusExtras& extras) {
  const bool changed = prev != curr;
  const bool extra = !gestures.empty() || !extras.failure_notes.empty();
  if (!changed && !extra && !(extras.announce_empty && curr.empty())) return std::nullopt;

  std::vector<std::string> lines;
  if (curr.empty()) {
    lines.emplace_back(prev.empty() ? prompt_asset("status_no_objects") : prompt_asset("status_all_removed"));
  } else if (prev.empty() || !changed) {
    lines.push_back(render_template(prompt_asset("status_objects"), {{"object_list", bracket_list(curr)}}));
  } else {
    lines.push_back(render_template(prompt_asset("status_objects_changed"), {{"object_list", bracket_list(curr)}}));
  }
  for (const auto& g : gestures) lines.push_back(render_template(prompt_asset("status_gesture"), {{"gesture", g}}));
  for (const auto& n : extras.failure_notes) lines.push_back(n);
  lines.emplace_back(prompt_asset("status_acknowledge"));
  return text::join(lines, "\n");
}

std::string render_action_failure(const std::string& action, const std::string& object) {
  return render_template(prompt_asset("status_action_failed"), {{"action", action}, {"object", object}});
}

}  // namespace groundbot::chat
