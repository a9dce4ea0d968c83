#pragma once

#include <mutex>
#include <string>
#include <vector>

#include "pocketpilot/inference/backend.hpp"

namespace pocketpilot::inference {

// Scripted backend: the first rule whose substring occurs in the prompt (or
// the first match-anything rule) fires. Every prompt is recorded.
class MockBackend final : public Backend {
 public:
  MockBackend(BackendConfig config, std::vector<MockRule> script, Clock& clock,
              const prompt::Tokenizer& tokenizer = prompt::default_tokenizer());
  // Uses config.mock_script.
  MockBackend(BackendConfig config, Clock& clock, const prompt::Tokenizer& tokenizer = prompt::default_tokenizer());

  std::vector<std::string> received_prompts() const;
  std::size_t call_count() const;

 protected:
  Reply exchange(std::string_view prompt_text, const GenerationParams& params) override;

 private:
  std::vector<MockRule> script_;
  mutable std::mutex mu_;
  std::vector<std::string> prompts_;
};

BackendConfig mock_config(std::string backend_id, Decimal param_count_billion = Decimal(8),
                          int context_tokens = 8192);

}  // namespace pocketpilot::inference
