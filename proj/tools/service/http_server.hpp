#pragma once

#include <memory>
#include <string>

#include "query_engine.hpp"

namespace tda::service {

/// HTTP front end for a QueryEngine. Requests run on a pool of
/// worker_count() threads; the engine must outlive the server.
class HttpServer {
 public:
  explicit HttpServer(const QueryEngine& engine);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds the listening socket. Port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called. Requires a successful bind().
  void listen();
  void stop();
  /// Blocks until the server is accepting connections.
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tda::service
