#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "pocketpilot/gateway/http_server.hpp"

#include <httplib.h>

#include <limits>

namespace pocketpilot::gateway {

PortInUse::PortInUse(int port) : Error("port " + std::to_string(port) + " is unavailable") {}

bool is_loopback(const std::string& host) {
  return host == "127.0.0.1" || host == "localhost" || host == "::1" || host.starts_with("127.");
}

namespace {

void send_json(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const ApiError& e) { send_json(res, e.to_json(), http_status(e.code())); }

Json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  try {
    return Json::parse(req.body);
  } catch (const Json::exception& e) {
    throw ApiError(ApiCode::kBadRequest, std::string("invalid JSON body: ") + e.what());
  }
}

std::optional<std::string> query(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  return req.get_param_value(key);
}

std::string require_query(const httplib::Request& req, const char* key) {
  auto v = query(req, key);
  if (!v) throw ApiError(ApiCode::kBadRequest, std::string("missing query parameter '") + key + "'");
  return *v;
}

std::size_t parse_limit(const std::optional<std::string>& s) {
  if (!s) return std::numeric_limits<std::size_t>::max();
  try {
    std::size_t used = 0;
    const long long v = std::stoll(*s, &used);
    if (used != s->size() || v < 0) throw std::invalid_argument("limit");
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ApiError(ApiCode::kBadRequest, "limit must be a non-negative integer");
  }
}

template <typename F>
httplib::Server::Handler guarded(F&& f) {
  return [f = std::forward<F>(f)](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (...) {
      send_error(res, current_api_error());
    }
  };
}

}  // namespace

HttpServer::HttpServer(App& app, ServerOptions options)
    : app_(app), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  if (!is_loopback(options_.host) && !options_.allow_remote) {
    throw ConfigError("refusing to bind non-loopback host '" + options_.host + "' without --allow-remote");
  }
  // SO_REUSEPORT (the library default) would let a second server share the port.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  install_routes();
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::install_routes() {
  auto& s = *server_;
  s.Get("/api/health", guarded([this](const auto&, auto& res) { send_json(res, app_.health()); }));

  s.Post(R"(/api/ingest/([a-z]+))", guarded([this](const httplib::Request& req, auto& res) {
           std::lock_guard lock(write_mu_);
           send_json(res, app_.ingest(req.matches[1].str(), req.body));
         }));

  s.Get("/api/events", guarded([this](const httplib::Request& req, auto& res) {
          const std::string kind = require_query(req, "kind");
          const UtcMs from = parse_time_arg(require_query(req, "from"));
          const UtcMs to = parse_time_arg(require_query(req, "to"));
          send_json(res, app_.events(kind, from, to));
        }));

  s.Get("/api/esm/pending", guarded([this](const auto&, auto& res) { send_json(res, app_.esm_pending()); }));

  s.Post("/api/esm/answer", guarded([this](const httplib::Request& req, auto& res) {
           const Json body = parse_body(req);
           std::lock_guard lock(write_mu_);
           send_json(res, app_.esm_answer(body));
         }));

  s.Post("/api/prompt/preview", guarded([this](const httplib::Request& req, auto& res) {
           send_json(res, app_.prompt_preview(parse_body(req)));
         }));

  s.Post("/api/run", guarded([this](const httplib::Request& req, auto& res) {
           send_json(res, app_.run(parse_body(req)));
         }));

  s.Get(R"(/api/runs/([^/]+))", guarded([this](const httplib::Request& req, auto& res) {
          send_json(res, app_.get_run(req.matches[1].str()));
        }));

  s.Get("/api/recommendations", guarded([this](const httplib::Request& req, auto& res) {
          const auto before = query(req, "before");
          send_json(res, app_.recommendations(parse_limit(query(req, "limit")),
                                              before ? std::optional<UtcMs>(parse_time_arg(*before)) : std::nullopt));
        }));

  s.Get("/api/metrics/compare", guarded([this](const httplib::Request& req, auto& res) {
          const auto report = app_.compare();
          if (query(req, "format").value_or("json") == "text") {
            res.set_content(report.to_text_table(), "text/plain");
          } else {
            send_json(res, report.to_json());
          }
        }));

  s.Get("/api/schedule", guarded([this](const auto&, auto& res) { send_json(res, app_.schedule_list()); }));

  if (options_.static_dir) s.set_mount_point("/", options_.static_dir->string());
}

void HttpServer::start() {
  if (options_.port == 0) {
    port_ = server_->bind_to_any_port(options_.host);
    if (port_ < 0) throw PortInUse(0);
  } else {
    if (!server_->bind_to_port(options_.host, options_.port)) throw PortInUse(options_.port);
    port_ = options_.port;
  }
  listener_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  if (options_.tick_interval_ms > 0) {
    ticker_ = std::thread([this] {
      std::unique_lock lock(state_mu_);
      while (!stopping_) {
        lock.unlock();
        try {
          std::lock_guard w(write_mu_);
          app_.tick();
        } catch (const std::exception&) {
        }
        lock.lock();
        stopped_cv_.wait_for(lock, std::chrono::milliseconds(options_.tick_interval_ms), [this] { return stopping_; });
      }
    });
  }
}

void HttpServer::stop() {
  {
    std::lock_guard lock(state_mu_);
    stopping_ = true;
  }
  stopped_cv_.notify_all();
  server_->stop();
  if (listener_.joinable()) listener_.join();
  if (ticker_.joinable()) ticker_.join();
}

void HttpServer::wait() {
  std::unique_lock lock(state_mu_);
  stopped_cv_.wait(lock, [this] { return stopping_; });
}

}  // namespace pocketpilot::gateway
