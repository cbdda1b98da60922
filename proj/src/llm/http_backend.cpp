#include "groundbot/llm/http_backend.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "groundbot/core/errors.hpp"
#include "groundbot/core/text.hpp"

namespace groundbot::llm {

namespace {

bool transient_status(int status) { return status == 429 || status == 500 || status == 502 || status == 503 || status == 504; }

bool signals_context_overflow(int status, const std::string& body) {
  if (status != 400 && status != 413) return false;
  auto lower = text::to_lower(body);
  return lower.find("context_length_exceeded") != std::string::npos ||
         lower.find("maximum context length") != std::string::npos ||
         lower.find("context length") != std::string::npos;
}

}  // namespace

HttpBackendOptions http_options_from_env(HttpBackendOptions defaults) {
  if (const char* url = std::getenv("GROUNDBOT_BACKEND_URL"); url && *url) defaults.base_url = url;
  if (const char* key = std::getenv("GROUNDBOT_API_KEY"); key && *key) {
    defaults.api_key = key;
  } else if (const char* okey = std::getenv("OPENAI_API_KEY"); okey && *okey && defaults.api_key.empty()) {
    defaults.api_key = okey;
  }
  return defaults;
}

HttpChatBackend::HttpChatBackend(HttpBackendOptions options) : options_(std::move(options)) {
  const auto& url = options_.base_url;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("backend URL needs a scheme: " + url);
  auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw ConfigError("unsupported backend scheme: " + scheme);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (scheme == "https") throw ConfigError("built without TLS support; cannot reach " + url);
#endif
  auto path_start = url.find('/', scheme_end + 3);
  origin_ = url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix.ends_with("/v1") ? prefix + "/chat/completions" : prefix + "/v1/chat/completions";
}

std::string HttpChatBackend::complete(std::span<const WireMessage> messages, const CompletionParams& params) {
  check_messages(messages);
  nlohmann::json body{{"model", params.model_id},
                      {"temperature", params.temperature},
                      {"max_tokens", params.max_tokens},
                      {"messages", nlohmann::json::array()}};
  for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

  const auto timeout = std::chrono::duration<double>(params.timeout_s);
  const auto timeout_us = std::chrono::duration_cast<std::chrono::microseconds>(timeout);

  std::string last_error;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(options_.retry_backoff_s * attempt));
    }
    httplib::Client client(origin_);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count() + 1, 0);
    client.set_read_timeout(timeout_us.count() / 1000000, timeout_us.count() % 1000000);
    client.set_write_timeout(timeout_us.count() / 1000000, timeout_us.count() % 1000000);

    auto res = client.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_error = "transport failure talking to " + origin_ + ": " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) {
      try {
        auto j = nlohmann::json::parse(res->body);
        return rtrim(j.at("choices").at(0).at("message").at("content").get<std::string>());
      } catch (const std::exception& ex) {
        throw BackendError(BackendErrorKind::remote, std::string("malformed completion response: ") + ex.what(),
                           res->status, res->body);
      }
    }
    if (signals_context_overflow(res->status, res->body)) {
      throw BackendError(BackendErrorKind::context_overflow, "remote rejected the request: context too long",
                         res->status, res->body);
    }
    if (transient_status(res->status) && attempt < options_.max_retries) {
      last_error = "remote status " + std::to_string(res->status);
      continue;
    }
    throw BackendError(BackendErrorKind::remote, "remote returned status " + std::to_string(res->status),
                       res->status, res->body);
  }
  throw BackendError(BackendErrorKind::transport, last_error);
}

}  // namespace groundbot::llm
