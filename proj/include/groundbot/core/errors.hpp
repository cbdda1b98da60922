#pragma once

#include <stdexcept>
#include <string>

namespace groundbot {

// Invalid static configuration (registry, templates, profile).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated an operation's precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace groundbot
