#include "pocketpilot/inference/backend.hpp"

#include <stdexcept>

#include "pocketpilot/prompt/assembler.hpp"

namespace pocketpilot::inference {

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::kLocalServer:
      return "local_server";
    case BackendKind::kCloudApi:
      return "cloud_api";
    case BackendKind::kMock:
      return "mock";
  }
  return "mock";
}

std::optional<BackendKind> parse_backend_kind(std::string_view text) {
  if (text == "local_server") return BackendKind::kLocalServer;
  if (text == "cloud_api") return BackendKind::kCloudApi;
  if (text == "mock") return BackendKind::kMock;
  return std::nullopt;
}

void BackendConfig::validate() const {
  if (backend_id.empty()) {
    throw std::invalid_argument("backend_id must not be empty");
  }
  const std::string where = "backend '" + backend_id + "': ";
  if (param_count_billion <= Decimal(0)) {
    throw std::invalid_argument(where + "param_count_billion must be > 0");
  }
  if (context_tokens <= 0) {
    throw std::invalid_argument(where + "context_tokens must be > 0");
  }
  if (price_usd_per_mtok < Decimal(0)) {
    throw std::invalid_argument(where + "price_usd_per_mtok must be >= 0");
  }
  if (is_local() && price_usd_per_mtok != Decimal(0)) {
    throw std::invalid_argument(where + "local and mock backends must have price 0");
  }
  if (kind != BackendKind::kMock && endpoint_url.empty()) {
    throw std::invalid_argument(where + "endpoint_url is required");
  }
  if (kind == BackendKind::kMock && mock_script.empty()) {
    throw std::invalid_argument(where + "mock backend needs a non-empty script");
  }
}

Json to_json(const BackendConfig& cfg) {
  return Json{{"backend_id", cfg.backend_id},
              {"kind", to_string(cfg.kind)},
              {"endpoint_url", cfg.endpoint_url},
              {"model_name", cfg.model_name},
              {"param_count_billion", cfg.param_count_billion.to_string()},
              {"context_tokens", cfg.context_tokens},
              {"price_usd_per_mtok", cfg.price_usd_per_mtok.to_string()},
              {"local", cfg.is_local()}};
}

Json to_json(const InferenceResult& r) {
  return Json{{"text", r.text},
              {"prompt_tokens", r.prompt_tokens},
              {"completion_tokens", r.completion_tokens},
              {"latency_ms", r.latency_ms},
              {"backend_id", r.backend_id}};
}

BackendError::BackendError(int status, std::string body)
    : InferenceError("backend error (status " + std::to_string(status) + "): " + body),
      status_(status),
      body_(std::move(body)) {}

ContextOverflow::ContextOverflow(int needed, int context_tokens)
    : InferenceError("prompt plus max_tokens needs " + std::to_string(needed) +
                     " tokens but the context window is " + std::to_string(context_tokens)) {}

Backend::Backend(BackendConfig config, Clock& clock, const prompt::Tokenizer& tokenizer)
    : config_(std::move(config)), clock_(clock), tokenizer_(tokenizer) {}

InferenceResult Backend::generate(std::string_view prompt_text, int prompt_tokens,
                                  const GenerationParams& params) {
  const int needed = prompt_tokens + params.max_tokens;
  if (needed > config_.context_tokens) {
    throw ContextOverflow(needed, config_.context_tokens);
  }

  std::lock_guard lock(in_flight_);
  const double start = clock_.monotonic_ms();
  Reply reply = exchange(prompt_text, params);
  const double elapsed = clock_.monotonic_ms() - start;

  InferenceResult result;
  result.prompt_tokens = reply.prompt_tokens.value_or(prompt_tokens);
  result.completion_tokens = reply.completion_tokens.value_or(tokenizer_.count(reply.text));
  result.text = std::move(reply.text);
  result.latency_ms = elapsed < 0 ? 0.0 : elapsed;
  result.backend_id = config_.backend_id;
  return result;
}

InferenceResult Backend::generate(const prompt::AssembledPrompt& prompt, const GenerationParams& params) {
  return generate(prompt.text, prompt.token_count, params);
}

}  // namespace pocketpilot::inference
