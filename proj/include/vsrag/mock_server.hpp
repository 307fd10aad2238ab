#pragma once

#include <memory>
#include <string>
#include <thread>

#include "vsrag/mock_backend.hpp"

namespace httplib {
class Server;
}

namespace vsrag {

/// Serves a MockBackend over the HTTP wire protocol on 127.0.0.1 (or `host`).
class MockServer {
 public:
  explicit MockServer(std::shared_ptr<MockBackend> backend, std::string host = "127.0.0.1");
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  /// Binds `port` (0 picks a free one) and serves on a background thread.
  /// Throws ConfigError if the port is unavailable. Returns the bound port.
  int start(int port = 0);

  /// Binds and serves on the calling thread until stop() is called from elsewhere.
  void run(int port);

  void stop();
  int port() const noexcept { return port_; }
  std::string url() const;

 private:
  void install_routes();

  std::shared_ptr<MockBackend> backend_;
  std::string host_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace vsrag
