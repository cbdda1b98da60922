#include "groundbot/protocol/prompts.hpp"

#include "groundbot/core/errors.hpp"
#include "groundbot/core/text.hpp"
#include "groundbot/protocol/detail/assets.hpp"

namespace groundbot::protocol {

RobotProfile nicol_profile() {
  return {
      "NICOL",
      "Neuro-Inspired Collaborator",
      "You were designed and built by the Knowledge Technology group of the University of Hamburg. "
      "You are located at the Informatikum in Hamburg. You are a humanoid robot with two arms and a "
      "head, and you have a table in front of you that you can see using a camera. You have two hands "
      "with five fingers each.",
  };
}

std::string_view prompt_asset(std::string_view name) {
  for (std::size_t i = 0; i < detail::kPromptAssetCount; ++i) {
    if (detail::kPromptAssets[i].name == name) return detail::kPromptAssets[i].text;
  }
  throw ConfigError("unknown prompt asset: " + std::string(name));
}

std::string_view prompt_asset_version() { return detail::kPromptAssetVersion; }

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(tmpl.size() + 256);
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      auto close = tmpl.find('}', i + 1);
      if (close == std::string_view::npos) throw ConfigError("unterminated placeholder in template");
      std::string key(tmpl.substr(i + 1, close - i - 1));
      auto it = vars.find(key);
      if (it == vars.end()) throw ConfigError("no value for placeholder {" + key + "}");
      out += it->second;
      i = close + 1;
    } else {
      out.push_back(tmpl[i++]);
    }
  }
  return out;
}

std::string render_action_line(const ActionSpec& spec) {
  return spec.name + "(" + spec.parameter + "): " + spec.description;
}

std::string render_system_prompt(const RobotProfile& profile, const ActionRegistry& registry) {
  if (registry.empty()) throw ConfigError("system prompt needs at least one action function");
  std::vector<std::string> lines;
  lines.reserve(registry.size());
  for (const auto& spec : registry.specs()) lines.push_back(render_action_line(spec));
  return render_template(prompt_asset("system_prompt"), {
                                                            {"robot_name", profile.name},
                                                            {"robot_long_name", profile.long_name},
                                                            {"identity", profile.identity},
                                                            {"action_list", text::join(lines, "\n")},
                                                        });
}

std::string render_priming_query() { return std::string(prompt_asset("priming_query")); }

std::string render_user_prompt(const RobotProfile& profile, std::string_view utterance) {
  return render_template(prompt_asset("user_prompt"),
                         {{"robot_name", profile.name}, {"utterance", std::string(utterance)}});
}

std::string bracket_list(const std::vector<std::string>& names) { return "[" + text::join(names, ", ") + "]"; }

std::string render_object_facts_query(const std::vector<std::string>& objects) {
  return render_template(prompt_asset("object_facts"), {{"object_list", bracket_list(objects)}});
}

}  // namespace groundbot::protocol
