#include "http_server.hpp"

#include <httplib.h>

#include <algorithm>

#include "tda/error.hpp"
#include "tda/parallel.hpp"

namespace tda::service {
namespace {

void reply(const httplib::Request& req, httplib::Response& res, const HttpResponse& out) {
  res.status = out.status;
  for (const auto& [name, value] : out.headers) res.set_header(name, value);
  if (req.has_header("X-Request-Id")) res.set_header("X-Request-Id", req.get_header_value("X-Request-Id"));
  res.set_content(out.body, "application/json");
}

QueryParams params_of(const httplib::Request& req) {
  QueryParams params;
  for (const auto& [name, value] : req.params) params[name] = value;
  return params;
}

}  // namespace

struct HttpServer::Impl {
  explicit Impl(const QueryEngine& e) : engine(e) {}
  const QueryEngine& engine;
  httplib::Server server;
  bool bound = false;
};

HttpServer::HttpServer(const QueryEngine& engine) : impl_(std::make_unique<Impl>(engine)) {
  auto& server = impl_->server;
  const std::size_t threads = std::max<std::size_t>(worker_count(), 2);
  server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  server.Get(R"(/v1/.*)", [this](const httplib::Request& req, httplib::Response& res) {
    reply(req, res, impl_->engine.handle_get(req.path, params_of(req)));
  });
  server.Post(R"(/v1/.*)", [this](const httplib::Request& req, httplib::Response& res) {
    reply(req, res, impl_->engine.handle_post(req.path, req.body));
  });
  server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    const ErrorCode code = res.status == 404 ? ErrorCode::not_found : ErrorCode::config;
    reply(req, res, {res.status, error_json(code, "no route for " + req.method + " " + req.path), {}});
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = 0;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else {
    bound = impl_->server.bind_to_port(host, port) ? port : -1;
  }
  if (bound <= 0) throw Error(ErrorCode::config, "cannot bind " + host + ":" + std::to_string(port));
  impl_->bound = true;
  return bound;
}

void HttpServer::listen() {
  if (!impl_->bound) throw Error(ErrorCode::internal, "listen() before bind()");
  impl_->server.listen_after_bind();
}

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace tda::service
