#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "pocketpilot/common/clock.hpp"
#include "pocketpilot/inference/transport.hpp"

namespace pocketpilot::gateway {

inline constexpr int kExitOk = 0;
inline constexpr int kExitApiError = 1;
inline constexpr int kExitUsage = 2;

// What the CLI takes from its surroundings; tests substitute each part.
struct CliEnvironment {
  Clock* clock = nullptr;  // null: system clock
  std::vector<std::pair<std::string, std::string>> env;
  std::shared_ptr<inference::HttpTransport> transport;
  bool install_signal_handlers = false;
};

// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const CliEnvironment& environment);

// Stops a running `serve` from another thread or a signal handler.
void request_shutdown();

}  // namespace pocketpilot::gateway
