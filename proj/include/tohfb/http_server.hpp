#pragma once
// HTTP + JSON front end of the experiment service.

#include <memory>
#include <string>

#include "tohfb/service.hpp"

namespace tohfb::service {

class HttpServer {
 public:
  explicit HttpServer(SessionManager& manager);
  ~HttpServer();

  /// Binds and serves until stop(); returns false when binding fails.
  bool listen(const std::string& host, int port);
  /// Binds an ephemeral port and returns it; serve with listen_after_bind().
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  bool is_running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tohfb::service
