#pragma once

#include <chrono>
#include <memory>
#include <semaphore>
#include <string>

#include "vsrag/backend.hpp"

namespace vsrag {

struct HttpOptions {
  std::chrono::milliseconds connect_timeout{2000};
  std::chrono::milliseconds read_timeout{120000};
  int max_in_flight = 16;
  int transport_retries = 1;
};

/// Wire-protocol client for POST /v1/chat, POST /v1/embed and GET /v1/health.
class HttpBackend final : public InferenceBackend {
 public:
  /// `base_url` is "http://host:port". Throws ConfigError on anything else.
  explicit HttpBackend(const std::string& base_url, HttpOptions options = {});
  ~HttpBackend() override;

  ChatResponse chat(const ChatRequest& request) override;
  EmbedResponse embed(const EmbedRequest& request) override;
  HealthInfo health() override;

  const std::string& host() const noexcept { return host_; }
  int port() const noexcept { return port_; }

 private:
  nlohmann::json call(const std::string& method, const std::string& path, const std::string& body);

  std::string host_;
  int port_ = 0;
  HttpOptions options_;
  std::unique_ptr<std::counting_semaphore<1024>> slots_;
};

}  // namespace vsrag
