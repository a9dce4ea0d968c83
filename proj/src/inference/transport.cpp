#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "pocketpilot/inference/transport.hpp"

#include <httplib.h>

#include <stdexcept>

namespace pocketpilot::inference {

namespace {

void apply_timeout(httplib::Client& client, const Timeouts& t) {
  const auto to_us = [](double s) { return static_cast<long>(s * 1e6); };
  const long connect_us = to_us(t.connect_s);
  const long total_us = to_us(t.total_s);
  client.set_connection_timeout(connect_us / 1'000'000, connect_us % 1'000'000);
  client.set_read_timeout(total_us / 1'000'000, total_us % 1'000'000);
  client.set_write_timeout(total_us / 1'000'000, total_us % 1'000'000);
}

}  // namespace

std::pair<std::string, std::string> split_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw std::invalid_argument("endpoint url needs a scheme: '" + std::string(url) + "'");
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw std::invalid_argument("unsupported url scheme: '" + std::string(url) + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  std::string origin(url.substr(0, path_start));
  std::string prefix = path_start == std::string_view::npos ? std::string() : std::string(url.substr(path_start));
  while (!prefix.empty() && prefix.back() == '/') {
    prefix.pop_back();
  }
  if (origin.size() == static_cast<std::size_t>(scheme_end) + 3) {
    throw std::invalid_argument("endpoint url has no host: '" + std::string(url) + "'");
  }
  return {origin, prefix};
}

HttpResponse HttplibTransport::post(const HttpRequest& request) {
  const auto [origin, path] = split_url(request.url);
  httplib::Client client(origin);
  apply_timeout(client, request.timeouts);
  httplib::Headers headers;
  std::string content_type = "application/json";
  for (const auto& [k, v] : request.headers) {
    if (k == "Content-Type") {
      content_type = v;
    } else {
      headers.emplace(k, v);
    }
  }
  auto result = client.Post(path.empty() ? "/" : path, headers, request.body, content_type);
  if (!result) {
    throw TransportFailure(httplib::to_string(result.error()));
  }
  return HttpResponse{result->status, result->body};
}

std::shared_ptr<HttpTransport> make_http_transport() { return std::make_shared<HttplibTransport>(); }

}  // namespace pocketpilot::inference
