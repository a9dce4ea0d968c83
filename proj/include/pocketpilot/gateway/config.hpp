#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pocketpilot/common/decimal.hpp"
#include "pocketpilot/common/error.hpp"
#include "pocketpilot/inference/backend.hpp"
#include "pocketpilot/metering/meter.hpp"
#include "pocketpilot/orchestrator/pipeline.hpp"

namespace pocketpilot::gateway {

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Flat view of a key/value config document: "[a.b]" sections plus
// `key = value` lines, addressed as "a.b.key". Values are strings, numbers,
// booleans or arrays of those.
class ConfigDocument {
 public:
  struct Value {
    std::string scalar;  // raw text of a scalar (unquoted for strings)
    std::vector<std::string> items;
    bool is_array = false;
  };

  static ConfigDocument parse(std::string_view text);

  void set(const std::string& key, Value v) { values_[key] = std::move(v); }
  bool contains(const std::string& key) const { return values_.contains(key); }

  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<std::int64_t> get_int(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<Decimal> get_decimal(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  std::optional<std::vector<std::string>> get_list(const std::string& key) const;

  // Distinct names directly under `prefix.` (e.g. backend ids under "backend").
  std::vector<std::string> children(const std::string& prefix) const;

  // POCKETPILOT_<KEY> overrides with "__" separating path segments, e.g.
  // POCKETPILOT_DIGEST__BUDGET=128 or POCKETPILOT_BACKEND__CLOUD__API_KEY=...
  void apply_env(const std::vector<std::pair<std::string, std::string>>& env);

 private:
  std::map<std::string, Value> values_;
};

inline constexpr std::string_view kEnvPrefix = "POCKETPILOT_";

enum class ProbeKind { kNone, kSystem, kReplay };

struct ProbeSettings {
  ProbeKind kind = ProbeKind::kNone;
  metering::ResourceSample replay_sample;
};

struct AppConfig {
  std::filesystem::path store_path = "store";
  std::optional<std::filesystem::path> rules_path;
  std::string timezone = "UTC";
  std::string default_backend = "mock";
  std::string device_id = "local";
  UtcMs grace_ms = 30 * kMsPerMinute;
  int port = 8787;
  orchestrator::PipelineSettings pipeline;
  std::vector<inference::BackendConfig> backends;
  ProbeSettings probe;
};

// Built-in configuration: a scripted mock backend and the default template.
AppConfig default_config();

// Reads the document at `path` (if any), applies environment overrides and
// validates. Relative paths resolve against the config file's directory.
AppConfig load_config(const std::optional<std::filesystem::path>& path,
                      const std::vector<std::pair<std::string, std::string>>& env);
AppConfig config_from_document(const ConfigDocument& doc, const std::filesystem::path& base_dir);

std::vector<std::pair<std::string, std::string>> process_environment();

}  // namespace pocketpilot::gateway
