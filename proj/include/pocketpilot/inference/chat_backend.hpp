#pragma once

#include <memory>

#include "pocketpilot/inference/backend.hpp"
#include "pocketpilot/inference/transport.hpp"

namespace pocketpilot::inference {

inline constexpr std::string_view kChatCompletionsPath = "/v1/chat/completions";

// Client for the chat-completions JSON shape spoken by both local inference
// servers and cloud APIs.
class ChatCompletionsBackend final : public Backend {
 public:
  ChatCompletionsBackend(BackendConfig config, std::shared_ptr<HttpTransport> transport, Clock& clock,
                         const prompt::Tokenizer& tokenizer = prompt::default_tokenizer());

 protected:
  Reply exchange(std::string_view prompt_text, const GenerationParams& params) override;

 private:
  std::shared_ptr<HttpTransport> transport_;
};

Json build_chat_request(const BackendConfig& config, std::string_view prompt_text, const GenerationParams& params);

// Reads choices[0].message.content and usage.{prompt,completion}_tokens.
// Throws BackendError when the content path is absent.
Reply parse_chat_response(int status, const std::string& body);

}  // namespace pocketpilot::inference
