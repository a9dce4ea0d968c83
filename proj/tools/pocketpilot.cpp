#include <iostream>

#include "pocketpilot/gateway/cli.hpp"
#include "pocketpilot/gateway/config.hpp"

int main(int argc, char** argv) {
  pocketpilot::gateway::CliEnvironment env;
  env.env = pocketpilot::gateway::process_environment();
  env.install_signal_handlers = true;
  return pocketpilot::gateway::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr, env);
}
