#include "pocketpilot/inference/factory.hpp"

#include "pocketpilot/inference/chat_backend.hpp"
#include "pocketpilot/inference/mock_backend.hpp"

namespace pocketpilot::inference {

std::unique_ptr<Backend> make_backend(const BackendConfig& config, Clock& clock,
                                      std::shared_ptr<HttpTransport> transport) {
  config.validate();
  if (config.kind == BackendKind::kMock) {
    return std::make_unique<MockBackend>(config, clock);
  }
  if (!transport) {
    transport = make_http_transport();
  }
  return std::make_unique<ChatCompletionsBackend>(config, std::move(transport), clock);
}

}  // namespace pocketpilot::inference
