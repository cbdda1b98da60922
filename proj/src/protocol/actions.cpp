#include "groundbot/protocol/actions.hpp"

#include <algorithm>

#include "groundbot/core/errors.hpp"
#include "groundbot/core/text.hpp"

namespace groundbot::protocol {

namespace {

bool is_action_name(std::string_view name) {
  if (name.empty()) return false;
  if (!(name.front() >= 'a' && name.front() <= 'z') && name.front() != '_') return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

}  // namespace

ActionRegistry::ActionRegistry(std::vector<ActionSpec> specs) {
  for (auto& s : specs) add(std::move(s));
}

void ActionRegistry::add(ActionSpec spec) {
  if (!is_action_name(spec.name)) {
    throw ConfigError("action name must be a nonempty lowercase identifier: '" + spec.name + "'");
  }
  if (contains(spec.name)) throw ConfigError("duplicate action name: " + spec.name);
  if (spec.domain == ArgDomain::enumerated && spec.choices.empty()) {
    throw ConfigError("enumerated action '" + spec.name + "' has no choices");
  }
  specs_.push_back(std::move(spec));
}

const ActionSpec* ActionRegistry::find(std::string_view name) const {
  auto it = std::find_if(specs_.begin(), specs_.end(), [&](const ActionSpec& s) { return s.name == name; });
  return it == specs_.end() ? nullptr : &*it;
}

const std::vector<std::string>& emotion_names() {
  static const std::vector<std::string> names{"neutral", "happiness", "sadness", "anger", "surprise"};
  return names;
}

ActionRegistry default_registry() {
  ActionRegistry reg;
  reg.add({"express", "emotion",
           "Given a string emotion name, change your facial expression to match that emotion. "
           "The list of available emotions is [" + text::join(emotion_names(), ", ") + "].",
           ArgDomain::enumerated, emotion_names(), {}});
  reg.add({"look", "object",
           "Given a string of an object name, move your head to look at that object. In any situation, "
           "the object name can also be \"user\" or \"hand\" in order to look at the user or user's hand, "
           "or it can be \"table\" in order to look at the table.",
           ArgDomain::open, {}, {"user", "hand", "table"}});
  reg.add({"point", "object",
           "Given a string of an object name, use your arms to point to that object on the table. "
           "In any situation, the object name can also be \"user\" in order to point at the user.",
           ArgDomain::open, {}, {"user"}});
  reg.add({"give", "object",
           "Given a string of an object name, use your arms to grasp that object on the table and give "
           "it to the user. You can hand objects to the user with this function.",
           ArgDomain::open, {}, {}});
  return reg;
}

bool argument_in_domain(const ActionSpec& spec, std::string_view argument) {
  if (argument.empty()) return false;
  if (spec.domain == ArgDomain::open) return true;
  return std::find(spec.choices.begin(), spec.choices.end(), argument) != spec.choices.end();
}

}  // namespace groundbot::protocol
