#include "copilot/common/http.hpp"

#include <httplib.h>

#include "copilot/common/text.hpp"

namespace copilot::net {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // /path?query
};

bool split_url(const std::string& url, SplitUrl& out) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) return false;
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    out.origin = url;
    out.path = "/";
  } else {
    out.origin = url.substr(0, path_start);
    out.path = url.substr(path_start);
  }
  return !out.origin.empty();
}

httplib::Headers to_headers(const Headers& headers) {
  httplib::Headers out;
  for (const auto& [k, v] : headers) out.emplace(k, v);
  return out;
}

template <typename Call>
HttpResponse run(const std::string& url, std::chrono::milliseconds timeout, Call&& call) {
  HttpResponse response;
  SplitUrl parts;
  if (!split_url(url, parts)) {
    response.error = "malformed URL: " + url;
    return response;
  }
  try {
    httplib::Client client(parts.origin);
    client.set_follow_location(true);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto result = call(client, parts.path);
    if (!result) {
      response.error = httplib::to_string(result.error());
      return response;
    }
    response.status = result->status;
    response.body = result->body;
  } catch (const std::exception& e) {
    response.error = e.what();
  }
  return response;
}

}  // namespace

HttpResponse http_get(const std::string& url, std::chrono::milliseconds timeout,
                      const Headers& headers) {
  return run(url, timeout, [&](httplib::Client& client, const std::string& path) {
    return client.Get(path, to_headers(headers));
  });
}

HttpResponse http_post_json(const std::string& url, const std::string& body,
                            std::chrono::milliseconds timeout, const Headers& headers) {
  return run(url, timeout, [&](httplib::Client& client, const std::string& path) {
    return client.Post(path, to_headers(headers), body, "application/json");
  });
}

bool is_http_url(const std::string& s) {
  return text::starts_with_icase(s, "http://") || text::starts_with_icase(s, "https://");
}

}  // namespace copilot::net
