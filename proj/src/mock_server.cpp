#include "vsrag/mock_server.hpp"

#include <httplib.h>
#include <sys/socket.h>

#include "vsrag/errors.hpp"

namespace vsrag {

namespace {

void reply_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(nlohmann::json{{"error", message}}.dump(), "application/json");
}

template <typename Handler>
void guarded(httplib::Response& res, Handler&& handler) {
  try {
    handler();
  } catch (const DataError& e) {
    reply_error(res, 400, e.what());
  } catch (const std::exception& e) {
    reply_error(res, 500, e.what());
  }
}

}  // namespace

MockServer::MockServer(std::shared_ptr<MockBackend> backend, std::string host)
    : backend_(std::move(backend)), host_(std::move(host)), server_(std::make_unique<httplib::Server>()) {
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  install_routes();
}

MockServer::~MockServer() { stop(); }

void MockServer::install_routes() {
  server_->Post("/v1/chat", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = nlohmann::json::parse(req.body, nullptr, false);
      if (body.is_discarded()) throw DataError("request body is not JSON");
      const auto response = backend_->chat(chat_request_from_json(body));
      res.set_content(to_json(response).dump(), "application/json");
    });
  });
  server_->Post("/v1/embed", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = nlohmann::json::parse(req.body, nullptr, false);
      if (body.is_discarded()) throw DataError("request body is not JSON");
      const auto response = backend_->embed(embed_request_from_json(body));
      res.set_content(to_json(response).dump(), "application/json");
    });
  });
  server_->Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { res.set_content(to_json(backend_->health()).dump(), "application/json"); });
  });
}

int MockServer::start(int port) {
  if (port == 0) {
    port_ = server_->bind_to_any_port(host_);
  } else {
    port_ = server_->bind_to_port(host_, port) ? port : -1;
  }
  if (port_ <= 0) throw ConfigError("port unavailable: " + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void MockServer::run(int port) {
  if (!server_->bind_to_port(host_, port)) throw ConfigError("port unavailable: " + std::to_string(port));
  port_ = port;
  server_->listen_after_bind();
}

void MockServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockServer::url() const { return "http://" + host_ + ":" + std::to_string(port_); }

}  // namespace vsrag
