#include "tohfb/http_server.hpp"

#include "httplib.h"

namespace tohfb::service {

using nlohmann::json;

struct HttpServer::Impl {
  httplib::Server server;
};

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <class F>
void guarded(httplib::Response& res, F&& f) {
  try {
    reply(res, 200, f());
  } catch (const Error& e) {
    reply(res, http_status(e.code()), {{"error", std::string(to_string(e.code()))}, {"message", e.what()}});
  } catch (const json::exception& e) {
    reply(res, 400, {{"error", "ParseError"}, {"message", e.what()}});
  } catch (const std::exception& e) {
    reply(res, 500, {{"error", "Internal"}, {"message", e.what()}});
  }
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  return json::parse(req.body);
}

}  // namespace

HttpServer::HttpServer(SessionManager& m) : impl_(std::make_unique<Impl>()) {
  auto& srv = impl_->server;
  srv.Post("/sessions", [&m](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json b = body_of(req);
      std::optional<std::uint64_t> seed;
      if (b.contains("seed") && !b.at("seed").is_null()) seed = b.at("seed").get<std::uint64_t>();
      return m.create_session(b.at("condition").get<std::string>(), seed);
    });
  });
  srv.Get(R"(/sessions/([^/]+))", [&m](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return m.session_view(req.matches[1]); });
  });
  srv.Post(R"(/sessions/([^/]+)/moves)", [&m](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json b = body_of(req);
      return m.submit_move(req.matches[1], b.at("from").get<int>(), b.at("to").get<int>());
    });
  });
  srv.Post(R"(/sessions/([^/]+)/feedback)", [&m](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return m.request_feedback(req.matches[1]); });
  });
  srv.Post(R"(/sessions/([^/]+)/advance)", [&m](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return m.advance(req.matches[1]); });
  });
  srv.Get("/stats", [&m](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::optional<std::string> c, p;
      if (req.has_param("condition")) c = req.get_param_value("condition");
      if (req.has_param("phase")) p = req.get_param_value("phase");
      return m.stats(c, p);
    });
  });
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }
int HttpServer::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }
bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }
void HttpServer::stop() { impl_->server.stop(); }
bool HttpServer::is_running() const { return impl_->server.is_running(); }

}  // namespace tohfb::service
