#pragma once

#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pocketpilot/common/clock.hpp"
#include "pocketpilot/common/decimal.hpp"
#include "pocketpilot/common/error.hpp"
#include "pocketpilot/common/json.hpp"
#include "pocketpilot/prompt/tokenizer.hpp"

namespace pocketpilot::prompt {
struct AssembledPrompt;
}

namespace pocketpilot::inference {

enum class BackendKind { kLocalServer, kCloudApi, kMock };

std::string_view to_string(BackendKind kind);
std::optional<BackendKind> parse_backend_kind(std::string_view text);

struct Timeouts {
  double connect_s = 5.0;
  double total_s = 120.0;
};

// One scripted mock reaction. An empty `match` matches every prompt.
struct MockRule {
  std::optional<std::string> match;
  std::string reply;
  double delay_ms = 0.0;
};

struct BackendConfig {
  std::string backend_id;
  BackendKind kind = BackendKind::kMock;
  std::string endpoint_url;
  std::optional<std::string> api_key;
  std::string model_name;
  Decimal param_count_billion = Decimal(1);
  int context_tokens = 4096;
  Decimal price_usd_per_mtok = Decimal(0);
  Timeouts timeouts;
  std::vector<MockRule> mock_script;  // kind == kMock only

  // Throws std::invalid_argument on a violated invariant.
  void validate() const;
  // Runs on the user's machine; nothing leaves the device.
  bool is_local() const { return kind != BackendKind::kCloudApi; }
};

Json to_json(const BackendConfig& cfg);  // never includes the api key

struct GenerationParams {
  int max_tokens = 256;
  double temperature = 0.2;
  std::optional<std::int64_t> seed;
};

struct InferenceResult {
  std::string text;
  int prompt_tokens = 0;
  int completion_tokens = 0;
  double latency_ms = 0.0;
  std::string backend_id;
};

Json to_json(const InferenceResult& r);

class InferenceError : public Error {
 public:
  using Error::Error;
};

class BackendUnreachable : public InferenceError {
 public:
  using InferenceError::InferenceError;
};

class BackendError : public InferenceError {
 public:
  BackendError(int status, std::string body);
  int status() const { return status_; }
  const std::string& body() const { return body_; }

 private:
  int status_;
  std::string body_;
};

class ContextOverflow : public InferenceError {
 public:
  ContextOverflow(int needed, int context_tokens);
};

// What a backend hands back before metering; token counts are optional
// because not every backend reports usage.
struct Reply {
  std::string text;
  std::optional<int> prompt_tokens;
  std::optional<int> completion_tokens;
};

// Uniform generation interface. generate() checks the context window before
// any exchange, times the exchange on the injected clock, and allows one
// in-flight generation per backend instance.
class Backend {
 public:
  Backend(BackendConfig config, Clock& clock, const prompt::Tokenizer& tokenizer);
  virtual ~Backend() = default;
  Backend(const Backend&) = delete;
  Backend& operator=(const Backend&) = delete;

  const BackendConfig& config() const { return config_; }
  const std::string& id() const { return config_.backend_id; }

  InferenceResult generate(std::string_view prompt_text, int prompt_tokens, const GenerationParams& params);
  InferenceResult generate(const prompt::AssembledPrompt& prompt, const GenerationParams& params);

 protected:
  virtual Reply exchange(std::string_view prompt_text, const GenerationParams& params) = 0;

  Clock& clock() { return clock_; }
  const prompt::Tokenizer& tokenizer() const { return tokenizer_; }

 private:
  BackendConfig config_;
  Clock& clock_;
  const prompt::Tokenizer& tokenizer_;
  std::mutex in_flight_;
};

}  // namespace pocketpilot::inference
