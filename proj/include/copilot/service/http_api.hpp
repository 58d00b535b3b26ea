#pragma once

#include <exception>
#include <memory>
#include <string>

#include <json.hpp>

#include "copilot/service/copilot_service.hpp"

namespace copilot::service {

/// HTTP status for an exception escaping a route: 400 for bad input, 404
/// for unknown ids, 409 while the index is busy or missing, 502 for model
/// gateway failures, 500 otherwise.
int status_for(const std::exception& e);

/// {"error": {"code", "message"[, "endpoint"]}}
nlohmann::json error_body(const std::exception& e);

/// JSON routes under /v1 over a CopilotService.
class HttpApi {
 public:
  explicit HttpApi(CopilotService& service);
  ~HttpApi();

  /// Binds to host:port (port 0 picks a free one) and returns the port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace copilot::service
