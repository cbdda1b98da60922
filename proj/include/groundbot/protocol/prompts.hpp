#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "groundbot/protocol/actions.hpp"

namespace groundbot::protocol {

// Identity text blocks substituted into the system prompt template.
struct RobotProfile {
  std::string name;       // short name used throughout, e.g. "NICOL"
  std::string long_name;  // expansion of the name
  std::string identity;   // who built it, where it is, what it looks like
};

RobotProfile nicol_profile();

// Raw template text shipped with the library, by asset name
// ("system_prompt", "priming_query", "user_prompt", "object_facts",
// "status_no_objects", "status_objects", "status_objects_changed",
// "status_all_removed", "status_gesture", "status_action_failed",
// "status_acknowledge"). Throws ConfigError for unknown names.
std::string_view prompt_asset(std::string_view name);
std::string_view prompt_asset_version();

// Replaces `{key}` placeholders. Unknown placeholders are a ConfigError.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& vars);

std::string render_action_line(const ActionSpec& spec);

// Throws ConfigError on an empty registry.
std::string render_system_prompt(const RobotProfile& profile, const ActionRegistry& registry);

std::string render_priming_query();
std::string render_user_prompt(const RobotProfile& profile, std::string_view utterance);
std::string render_object_facts_query(const std::vector<std::string>& objects);

// "[a, b, c]"
std::string bracket_list(const std::vector<std::string>& names);

}  // namespace groundbot::protocol
