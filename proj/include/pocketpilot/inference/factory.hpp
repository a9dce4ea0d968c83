#pragma once

#include <memory>

#include "pocketpilot/inference/backend.hpp"
#include "pocketpilot/inference/transport.hpp"

namespace pocketpilot::inference {

// Mock configs become MockBackend; the other kinds share the chat client.
std::unique_ptr<Backend> make_backend(const BackendConfig& config, Clock& clock,
                                      std::shared_ptr<HttpTransport> transport = nullptr);

}  // namespace pocketpilot::inference
