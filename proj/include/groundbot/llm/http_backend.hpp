#pragma once

#include <string>

#include "groundbot/llm/backend.hpp"

namespace groundbot::llm {

struct HttpBackendOptions {
  std::string base_url = "http://127.0.0.1:8000";  // scheme://host[:port][/prefix]
  std::string api_key;
  int max_retries = 2;
  double retry_backoff_s = 0.25;
};

// Reads GROUNDBOT_BACKEND_URL and GROUNDBOT_API_KEY (falling back to
// OPENAI_API_KEY) over the given defaults.
HttpBackendOptions http_options_from_env(HttpBackendOptions defaults = {});

// Chat-completions client: POST {prefix}/v1/chat/completions with
// {model, messages, temperature, max_tokens}.
class HttpChatBackend : public LlmBackend {
 public:
  explicit HttpChatBackend(HttpBackendOptions options);

  std::string complete(std::span<const WireMessage> messages, const CompletionParams& params) override;

  const std::string& endpoint_path() const { return path_; }

 private:
  HttpBackendOptions options_;
  std::string origin_;  // scheme://host:port
  std::string path_;
};

}  // namespace groundbot::llm
