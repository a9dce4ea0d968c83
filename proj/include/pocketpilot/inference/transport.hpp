#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "pocketpilot/common/error.hpp"
#include "pocketpilot/inference/backend.hpp"

namespace pocketpilot::inference {

struct HttpRequest {
  std::string url;  // absolute, e.g. http://127.0.0.1:8080/v1/chat/completions
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
  Timeouts timeouts;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Connection-level failure: refused, DNS, timeout.
class TransportFailure : public Error {
 public:
  using Error::Error;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse post(const HttpRequest& request) override;
};

std::shared_ptr<HttpTransport> make_http_transport();

// Splits "scheme://host[:port][/prefix]" into origin and path prefix
// (without a trailing slash). Throws std::invalid_argument on other shapes.
std::pair<std::string, std::string> split_url(std::string_view url);

}  // namespace pocketpilot::inference
