#include "pocketpilot/inference/mock_backend.hpp"

namespace pocketpilot::inference {

MockBackend::MockBackend(BackendConfig config, std::vector<MockRule> script, Clock& clock,
                         const prompt::Tokenizer& tokenizer)
    : Backend(std::move(config), clock, tokenizer), script_(std::move(script)) {}

MockBackend::MockBackend(BackendConfig config, Clock& clock, const prompt::Tokenizer& tokenizer)
    : Backend(config, clock, tokenizer), script_(std::move(config.mock_script)) {}

std::vector<std::string> MockBackend::received_prompts() const {
  std::lock_guard lock(mu_);
  return prompts_;
}

std::size_t MockBackend::call_count() const {
  std::lock_guard lock(mu_);
  return prompts_.size();
}

Reply MockBackend::exchange(std::string_view prompt_text, const GenerationParams& /*params*/) {
  {
    std::lock_guard lock(mu_);
    prompts_.emplace_back(prompt_text);
  }
  for (const auto& rule : script_) {
    if (!rule.match || prompt_text.find(*rule.match) != std::string_view::npos) {
      clock().sleep_for_ms(rule.delay_ms);
      return Reply{rule.reply, std::nullopt, std::nullopt};
    }
  }
  throw BackendError(404, "no mock rule matched the prompt");
}

BackendConfig mock_config(std::string backend_id, Decimal param_count_billion, int context_tokens) {
  BackendConfig cfg;
  cfg.backend_id = std::move(backend_id);
  cfg.kind = BackendKind::kMock;
  cfg.model_name = "mock";
  cfg.param_count_billion = param_count_billion;
  cfg.context_tokens = context_tokens;
  cfg.price_usd_per_mtok = Decimal(0);
  return cfg;
}

}  // namespace pocketpilot::inference
