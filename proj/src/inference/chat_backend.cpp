#include "pocketpilot/inference/chat_backend.hpp"

namespace pocketpilot::inference {

ChatCompletionsBackend::ChatCompletionsBackend(BackendConfig config, std::shared_ptr<HttpTransport> transport,
                                               Clock& clock, const prompt::Tokenizer& tokenizer)
    : Backend(std::move(config), clock, tokenizer), transport_(std::move(transport)) {}

Json build_chat_request(const BackendConfig& config, std::string_view prompt_text, const GenerationParams& params) {
  Json req{{"model", config.model_name},
           {"messages", Json::array({Json{{"role", "user"}, {"content", prompt_text}}})},
           {"max_tokens", params.max_tokens},
           {"temperature", params.temperature}};
  if (params.seed) {
    req["seed"] = *params.seed;
  }
  return req;
}

Reply parse_chat_response(int status, const std::string& body) {
  Json doc;
  try {
    doc = Json::parse(body);
  } catch (const Json::parse_error&) {
    throw BackendError(status, body);
  }
  const auto content = doc.value(Json::json_pointer("/choices/0/message/content"), Json());
  if (!content.is_string()) {
    throw BackendError(status, body);
  }
  Reply reply;
  reply.text = content.get<std::string>();
  const auto prompt_tokens = doc.value(Json::json_pointer("/usage/prompt_tokens"), Json());
  const auto completion_tokens = doc.value(Json::json_pointer("/usage/completion_tokens"), Json());
  if (prompt_tokens.is_number_integer()) {
    reply.prompt_tokens = prompt_tokens.get<int>();
  }
  if (completion_tokens.is_number_integer()) {
    reply.completion_tokens = completion_tokens.get<int>();
  }
  return reply;
}

Reply ChatCompletionsBackend::exchange(std::string_view prompt_text, const GenerationParams& params) {
  const auto& cfg = config();
  HttpRequest request;
  auto [origin, prefix] = split_url(cfg.endpoint_url);
  request.url = origin + prefix + std::string(kChatCompletionsPath);
  request.body = build_chat_request(cfg, prompt_text, params).dump();
  request.headers.emplace_back("Content-Type", "application/json");
  if (cfg.api_key && !cfg.api_key->empty()) {
    request.headers.emplace_back("Authorization", "Bearer " + *cfg.api_key);
  }
  request.timeouts = cfg.timeouts;

  HttpResponse response;
  try {
    response = transport_->post(request);
  } catch (const TransportFailure& e) {
    throw BackendUnreachable("backend '" + cfg.backend_id + "' unreachable: " + e.what());
  }
  if (response.status < 200 || response.status >= 300) {
    throw BackendError(response.status, response.body);
  }
  return parse_chat_response(response.status, response.body);
}

}  // namespace pocketpilot::inference
