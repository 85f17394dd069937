#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "bases/backends.hpp"

namespace bases {
namespace {

struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string path;    // /path?query
};

UrlParts split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto path_start = url.find('/', host_start);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport : public HttpTransport {
 public:
  HttpResponse post(const HttpRequest& request) override {
    const UrlParts parts = split_url(request.url);
    httplib::Client client(parts.origin);
    const auto seconds =
        std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(
        request.timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());

    httplib::Headers headers;
    for (const auto& [name, value] : request.headers) {
      headers.emplace(name, value);
    }
    HttpResponse out;
    auto result =
        client.Post(parts.path, headers, request.body, "application/json");
    if (!result) {
      out.error = httplib::to_string(result.error());
      return out;
    }
    out.status = result->status;
    out.body = result->body;
    return out;
  }
};

}  // namespace

std::shared_ptr<HttpTransport> make_http_transport() {
  return std::make_shared<HttplibTransport>();
}

}  // namespace bases
