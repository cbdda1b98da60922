#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace groundbot::protocol {

enum class ArgDomain { open, enumerated };

// A robot capability the LLM may invoke inline as `<name(argument)>`.
struct ActionSpec {
  std::string name;
  std::string parameter;  // shown in the prompt, e.g. "object" or "emotion"
  std::string description;
  ArgDomain domain = ArgDomain::open;
  std::vector<std::string> choices;          // members when domain is enumerated
  std::vector<std::string> special_targets;  // arguments valid regardless of the table
};

struct ActionCall {
  std::string action;
  std::string argument;
  std::string raw_text;

  bool operator==(const ActionCall&) const = default;
};

// Ordered set of actions with unique lowercase names. Insertion order is the
// order in which actions are listed in the system prompt.
class ActionRegistry {
 public:
  ActionRegistry() = default;
  explicit ActionRegistry(std::vector<ActionSpec> specs);

  // Throws ConfigError when the spec breaks a registry invariant.
  void add(ActionSpec spec);

  const ActionSpec* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }
  const std::vector<ActionSpec>& specs() const { return specs_; }
  bool empty() const { return specs_.empty(); }
  std::size_t size() const { return specs_.size(); }

 private:
  std::vector<ActionSpec> specs_;
};

// The five facial expressions, in prompt order.
const std::vector<std::string>& emotion_names();

// express, look, point, give as described to the robot's LLM.
ActionRegistry default_registry();

// Whether the argument belongs to the spec's domain. Open domains accept any
// non-empty argument.
bool argument_in_domain(const ActionSpec& spec, std::string_view argument);

}  // namespace groundbot::protocol
