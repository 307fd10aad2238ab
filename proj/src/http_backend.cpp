#include "vsrag/http_backend.hpp"

#include <httplib.h>

#include <map>
#include <mutex>
#include <regex>

#include "vsrag/errors.hpp"
#include "vsrag/mock_backend.hpp"

namespace vsrag {

HttpBackend::HttpBackend(const std::string& base_url, HttpOptions options) : options_(options) {
  static const std::regex kUrl(R"(^http://([^:/]+):(\d+)/?$)");
  std::smatch m;
  if (!std::regex_match(base_url, m, kUrl)) throw ConfigError("endpoint must look like http://host:port, got " + base_url);
  host_ = m[1].str();
  port_ = std::stoi(m[2].str());
  if (options_.max_in_flight < 1 || options_.max_in_flight > 1024) throw ConfigError("max_in_flight must be in [1, 1024]");
  slots_ = std::make_unique<std::counting_semaphore<1024>>(options_.max_in_flight);
}

HttpBackend::~HttpBackend() = default;

nlohmann::json HttpBackend::call(const std::string& method, const std::string& path, const std::string& body) {
  slots_->acquire();
  struct Release {
    std::counting_semaphore<1024>* s;
    ~Release() { s->release(); }
  } release{slots_.get()};

  httplib::Result result{nullptr, httplib::Error::Unknown};
  for (int attempt = 0; attempt <= options_.transport_retries; ++attempt) {
    httplib::Client client(host_, port_);
    client.set_connection_timeout(options_.connect_timeout);
    client.set_read_timeout(options_.read_timeout);
    result = method == "GET" ? client.Get(path) : client.Post(path, body, "application/json");
    if (result) break;
  }
  if (!result) {
    throw TransportError(method + " " + path + " failed: " + httplib::to_string(result.error()));
  }
  const auto parsed = nlohmann::json::parse(result->body, nullptr, false);
  if (result->status != 200) {
    std::string message = result->body;
    if (!parsed.is_discarded() && parsed.is_object() && parsed.contains("error") && parsed["error"].is_string()) {
      message = parsed["error"].get<std::string>();
    }
    throw BackendError(result->status, message);
  }
  if (parsed.is_discarded()) throw MalformedResponse(path + " returned invalid JSON");
  return parsed;
}

ChatResponse HttpBackend::chat(const ChatRequest& request) {
  validate(request);
  const auto body = call("POST", "/v1/chat", to_json(request).dump());
  try {
    return chat_response_from_json(body);
  } catch (const DataError& e) {
    throw MalformedResponse(std::string("/v1/chat: ") + e.what());
  }
}

EmbedResponse HttpBackend::embed(const EmbedRequest& request) {
  validate(request);
  const auto body = call("POST", "/v1/embed", to_json(request).dump());
  try {
    return embed_response_from_json(body);
  } catch (const DataError& e) {
    throw MalformedResponse(std::string("/v1/embed: ") + e.what());
  }
}

HealthInfo HttpBackend::health() {
  const auto body = call("GET", "/v1/health", "");
  try {
    return health_from_json(body);
  } catch (const DataError& e) {
    throw MalformedResponse(std::string("/v1/health: ") + e.what());
  }
}

std::shared_ptr<InferenceBackend> make_backend(const std::string& endpoint) {
  if (endpoint.rfind("mock:", 0) == 0) {
    static std::mutex mutex;
    static std::map<std::string, std::weak_ptr<MockBackend>> shared;
    const std::string path = endpoint.substr(5);
    std::lock_guard lock(mutex);
    if (auto existing = shared[path].lock()) return existing;
    auto backend = std::make_shared<MockBackend>(MockFixtures::load(path));
    shared[path] = backend;
    return backend;
  }
  if (endpoint.rfind("http://", 0) == 0) return std::make_shared<HttpBackend>(endpoint);
  throw ConfigError("unsupported endpoint '" + endpoint + "' (expected http://host:port or mock:<fixtures.json>)");
}

}  // namespace vsrag
