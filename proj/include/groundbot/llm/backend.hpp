#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace groundbot::llm {

// One chat message as sent on the wire. role is "system", "user" or "assistant".
struct WireMessage {
  std::string role;
  std::string content;

  bool operator==(const WireMessage&) const = default;
};

struct CompletionParams {
  std::string model_id = "gpt-3.5-turbo";
  double temperature = 0.2;
  int max_tokens = 512;
  double timeout_s = 60.0;
};

enum class BackendErrorKind { transport, remote, context_overflow, fixture_exhausted, fixture_mismatch };

std::string_view to_string(BackendErrorKind kind);

class BackendError : public std::runtime_error {
 public:
  BackendError(BackendErrorKind kind, const std::string& what, int status = 0, std::string body = {})
      : std::runtime_error(what), kind_(kind), status_(status), body_(std::move(body)) {}

  BackendErrorKind kind() const { return kind_; }
  int status() const { return status_; }          // HTTP status for remote errors, 0 otherwise
  const std::string& body() const { return body_; }

 private:
  BackendErrorKind kind_;
  int status_;
  std::string body_;
};

// Blocking chat completion. Implementations must be safe to call from several
// sessions concurrently.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;

  // Precondition: messages nonempty and messages[0] is the system message.
  // Returns the assistant text with trailing whitespace removed.
  virtual std::string complete(std::span<const WireMessage> messages, const CompletionParams& params) = 0;
};

// Throws PreconditionError when the message list breaks complete()'s contract.
void check_messages(std::span<const WireMessage> messages);

std::string rtrim(std::string s);

}  // namespace groundbot::llm
