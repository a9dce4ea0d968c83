#pragma once

#include <condition_variable>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "pocketpilot/gateway/app.hpp"

namespace httplib {
class Server;
}

namespace pocketpilot::gateway {

class PortInUse : public Error {
 public:
  explicit PortInUse(int port);
};

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8787;  // 0 picks a free port
  bool allow_remote = false;
  std::optional<std::filesystem::path> static_dir;
  // Scheduler tick period; 0 disables background ticking.
  int tick_interval_ms = 1000;
};

bool is_loopback(const std::string& host);

// Local JSON service over App. Mutating requests are serialized.
class HttpServer {
 public:
  HttpServer(App& app, ServerOptions options);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds and starts serving on a background thread. Throws PortInUse.
  void start();
  void stop();
  // Blocks until stop() is called.
  void wait();

  int port() const { return port_; }

 private:
  void install_routes();

  App& app_;
  ServerOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread listener_;
  std::thread ticker_;
  std::mutex write_mu_;
  std::mutex state_mu_;
  std::condition_variable stopped_cv_;
  bool stopping_ = false;
  int port_ = 0;
};

}  // namespace pocketpilot::gateway
