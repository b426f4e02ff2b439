#pragma once

#include <chrono>
#include <functional>
#include <iostream>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ectx/backend.hpp"

namespace ectx {

struct HttpBackendConfig {
  std::string endpoint;  // e.g. http://127.0.0.1:8080
  std::string api_key;
  std::string model = "default";
  std::string path = "/v1/chat/completions";
  int max_retries = 2;        // retries after the first attempt
  int retry_backoff_ms = 250; // doubled per retry
  int connect_timeout_s = 10;
  int read_timeout_s = 300;
};

// Chat-completion client. Sends the system prompt and the rendered context as
// the two messages of a standard chat request and returns the assistant
// message content verbatim. Transient transport failures (connection errors,
// 429, 5xx) are retried with bounded exponential backoff; anything left after
// the retry budget surfaces as BackendError with the response body included.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config,
                       std::function<void(const std::string&)> log = nullptr)
      : config_(std::move(config)), log_(std::move(log)) {
    if (config_.endpoint.empty()) {
      throw std::invalid_argument("http backend requires an endpoint URL");
    }
  }

  std::string complete(const BackendRequest& request) override {
    nlohmann::json body;
    body["model"] = config_.model;
    body["messages"] = nlohmann::json::array(
        {{{"role", "system"}, {"content", request.system_prompt}},
         {{"role", "user"}, {"content", request.rendered_context}}});
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_output_tokens;
    const std::string payload = body.dump();

    std::string last_error;
    const int attempts = config_.max_retries + 1;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
      // per-request client keeps the backend safe for concurrent episodes
      httplib::Client client(config_.endpoint);
      client.set_connection_timeout(config_.connect_timeout_s, 0);
      client.set_read_timeout(config_.read_timeout_s, 0);
      httplib::Headers headers;
      if (!config_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.api_key);
      }
      auto res = client.Post(config_.path, headers, payload, "application/json");
      if (res && res->status >= 200 && res->status < 300) {
        return extract_content(res->body);
      }
      if (!res) {
        last_error = "transport failure: " + httplib::to_string(res.error());
      } else {
        last_error = "http " + std::to_string(res->status) + ": " + res->body;
        const bool retryable = res->status == 429 || res->status >= 500;
        if (!retryable) break;
      }
      if (attempt < attempts) {
        const int delay = config_.retry_backoff_ms * (1 << (attempt - 1));
        log_line("retry " + std::to_string(attempt) + "/" +
                 std::to_string(config_.max_retries) + " after error: " +
                 last_error);
        std::this_thread::sleep_for(std::chrono::milliseconds(delay));
      }
    }
    throw BackendError("backend request failed: " + last_error);
  }

  std::string name() const override { return "http"; }

 private:
  static std::string extract_content(const std::string& body) {
    const auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.contains("choices") || j["choices"].empty() ||
        !j["choices"][0].contains("message") ||
        !j["choices"][0]["message"].contains("content")) {
      throw BackendError("malformed chat-completion response: " + body);
    }
    return j["choices"][0]["message"]["content"].get<std::string>();
  }

  void log_line(const std::string& line) const {
    if (log_) {
      log_(line);
    } else {
      std::cerr << "[http-backend] " << line << "\n";
    }
  }

  HttpBackendConfig config_;
  std::function<void(const std::string&)> log_;
};

}  // namespace ectx
