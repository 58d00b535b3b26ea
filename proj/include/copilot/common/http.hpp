#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace copilot::net {

struct HttpResponse {
  int status = 0;      // 0 when the request never produced a response
  std::string body;
  std::string error;   // transport error description when status == 0

  bool ok() const { return status >= 200 && status < 300; }
};

using Headers = std::vector<std::pair<std::string, std::string>>;

/// Blocking GET. Follows redirects. Never throws for transport failures.
HttpResponse http_get(const std::string& url, std::chrono::milliseconds timeout,
                      const Headers& headers = {});

/// Blocking POST with a JSON body.
HttpResponse http_post_json(const std::string& url, const std::string& body,
                            std::chrono::milliseconds timeout, const Headers& headers = {});

bool is_http_url(const std::string& s);

}  // namespace copilot::net
