#include "pocketpilot/gateway/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "pocketpilot/common/utf8.hpp"
#include "pocketpilot/inference/mock_backend.hpp"
#include "pocketpilot/orchestrator/schedule.hpp"

extern char** environ;

namespace pocketpilot::gateway {

namespace {

class Parser {
 public:
  Parser(std::string_view text, std::size_t line_no) : text_(text), line_no_(line_no) {}

  ConfigDocument::Value value() {
    skip_ws();
    ConfigDocument::Value v;
    if (peek() == '[') {
      ++pos_;
      v.is_array = true;
      while (true) {
        skip_ws();
        if (peek() == ']') {
          ++pos_;
          break;
        }
        v.items.push_back(scalar());
        skip_ws();
        if (peek() == ',') {
          ++pos_;
        } else if (peek() == ']') {
          ++pos_;
          break;
        } else {
          fail("expected ',' or ']' in array");
        }
      }
    } else {
      v.scalar = scalar();
    }
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] != '#') fail("trailing characters after value");
    return v;
  }

 private:
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("config line " + std::to_string(line_no_) + ": " + what);
  }

  std::string scalar() {
    const char c = peek();
    if (c == '"') return basic_string();
    if (c == '\'') {
      const auto end = text_.find('\'', pos_ + 1);
      if (end == std::string_view::npos) fail("unterminated string");
      std::string out(text_.substr(pos_ + 1, end - pos_ - 1));
      pos_ = end + 1;
      return out;
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::string_view(",] \t\r\n#").find(text_[pos_]) == std::string_view::npos) {
      ++pos_;
    }
    if (start == pos_) fail("missing value");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string basic_string() {
    std::string out;
    ++pos_;
    while (pos_ < text_.size()) {
      const char c = text_[pos_++];
      if (c == '"') return out;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (pos_ >= text_.size()) break;
      const char e = text_[pos_++];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        default: fail(std::string("unsupported escape \\") + e);
      }
    }
    fail("unterminated string");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_;
};

int bracket_balance(std::string_view s) {
  int depth = 0;
  bool in_str = false;
  char quote = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_str) {
      if (c == '\\' && quote == '"') {
        ++i;
      } else if (c == quote) {
        in_str = false;
      }
    } else if (c == '"' || c == '\'') {
      in_str = true;
      quote = c;
    } else if (c == '#') {
      while (i + 1 < s.size() && s[i + 1] != '\n') ++i;
    } else if (c == '[') {
      ++depth;
    } else if (c == ']') {
      --depth;
    }
  }
  return depth;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

ConfigDocument ConfigDocument::parse(std::string_view text) {
  ConfigDocument doc;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view trimmed = utf8::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    if (trimmed.front() == '[') {
      const auto close = trimmed.find(']');
      if (close == std::string_view::npos) throw ConfigError("config line " + std::to_string(line_no) + ": bad section");
      section = std::string(utf8::trim(trimmed.substr(1, close - 1)));
      continue;
    }
    const auto eq = trimmed.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key(utf8::trim(trimmed.substr(0, eq)));
    std::string rhs(trimmed.substr(eq + 1));
    const std::size_t start_line = line_no;
    // Arrays may span lines.
    while (bracket_balance(rhs) > 0 && std::getline(in, line)) {
      ++line_no;
      rhs += '\n';
      rhs += line;
    }
    const std::string full_key = section.empty() ? key : section + "." + key;
    doc.values_[full_key] = Parser(rhs, start_line).value();
  }
  return doc;
}

std::optional<std::string> ConfigDocument::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end() || it->second.is_array) return std::nullopt;
  return it->second.scalar;
}

std::optional<std::int64_t> ConfigDocument::get_int(const std::string& key) const {
  const auto s = get_string(key);
  if (!s) return std::nullopt;
  std::int64_t v = 0;
  const auto [p, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
  if (ec != std::errc() || p != s->data() + s->size()) throw ConfigError("'" + key + "' must be an integer");
  return v;
}

std::optional<double> ConfigDocument::get_double(const std::string& key) const {
  const auto s = get_string(key);
  if (!s) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(*s, &used);
    if (used != s->size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' must be a number");
  }
}

std::optional<Decimal> ConfigDocument::get_decimal(const std::string& key) const {
  const auto s = get_string(key);
  if (!s) return std::nullopt;
  try {
    return Decimal::parse(*s);
  } catch (const DecimalError& e) {
    throw ConfigError("'" + key + "': " + e.what());
  }
}

std::optional<bool> ConfigDocument::get_bool(const std::string& key) const {
  const auto s = get_string(key);
  if (!s) return std::nullopt;
  if (*s == "true") return true;
  if (*s == "false") return false;
  throw ConfigError("'" + key + "' must be true or false");
}

std::optional<std::vector<std::string>> ConfigDocument::get_list(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (!it->second.is_array) return std::vector<std::string>{it->second.scalar};
  return it->second.items;
}

std::vector<std::string> ConfigDocument::children(const std::string& prefix) const {
  std::set<std::string> names;
  const std::string p = prefix + ".";
  for (const auto& [k, _] : values_) {
    if (!k.starts_with(p)) continue;
    const auto rest = k.substr(p.size());
    const auto dot = rest.find('.');
    if (dot != std::string::npos) names.insert(rest.substr(0, dot));
  }
  return {names.begin(), names.end()};
}

void ConfigDocument::apply_env(const std::vector<std::pair<std::string, std::string>>& env) {
  for (const auto& [name, value] : env) {
    if (!name.starts_with(kEnvPrefix)) continue;
    std::string rest = lower(name.substr(kEnvPrefix.size()));
    std::string key;
    for (std::size_t i = 0; i < rest.size(); ++i) {
      if (rest.compare(i, 2, "__") == 0) {
        key += '.';
        ++i;
      } else {
        key += rest[i];
      }
    }
    if (key.empty()) continue;
    Value v;
    if (!value.empty() && value.front() == '[') {
      v = Parser(value, 0).value();
    } else {
      v.scalar = value;
    }
    values_[key] = std::move(v);
  }
}

std::vector<std::pair<std::string, std::string>> process_environment() {
  std::vector<std::pair<std::string, std::string>> out;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    const std::string_view entry(*e);
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    out.emplace_back(std::string(entry.substr(0, eq)), std::string(entry.substr(eq + 1)));
  }
  return out;
}

AppConfig default_config() {
  AppConfig cfg;
  auto& p = cfg.pipeline.prompt;
  p.instruction =
      "You are a personal wellbeing assistant running entirely on the user's phone. "
      "Use the user context, domain knowledge and sensing data below to answer the question.";
  p.c_domain =
      "Poor sleep amplifies emotional stress. Alcohol reduces sleep quality. "
      "Late-night screen use delays sleep onset.";
  p.question = "How is my mental state today, and what could help?";
  p.output_format = "A short analysis paragraph followed by three numbered, practical recommendations.";

  inference::BackendConfig mock = inference::mock_config("mock");
  mock.model_name = "mock-8b";
  mock.mock_script = {
      {std::string("sleep"), "Your sleep looks disrupted; establish a consistent sleep schedule.", 0.0},
      {std::nullopt, "Take a short break and reflect on what went well today.", 0.0},
  };
  cfg.backends.push_back(mock);
  return cfg;
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

inference::BackendConfig backend_from_document(const ConfigDocument& doc, const std::string& id) {
  const std::string k = "backend." + id + ".";
  inference::BackendConfig b;
  b.backend_id = id;
  const std::string kind = doc.get_string(k + "kind").value_or("mock");
  const auto parsed = inference::parse_backend_kind(kind);
  if (!parsed) throw ConfigError("backend '" + id + "': unknown kind '" + kind + "'");
  b.kind = *parsed;
  b.endpoint_url = doc.get_string(k + "endpoint_url").value_or("");
  b.model_name = doc.get_string(k + "model_name").value_or(id);
  if (auto v = doc.get_decimal(k + "param_count_billion")) b.param_count_billion = *v;
  if (auto v = doc.get_int(k + "context_tokens")) b.context_tokens = static_cast<int>(*v);
  if (auto v = doc.get_decimal(k + "price_usd_per_mtok")) b.price_usd_per_mtok = *v;
  if (auto v = doc.get_double(k + "connect_timeout_s")) b.timeouts.connect_s = *v;
  if (auto v = doc.get_double(k + "total_timeout_s")) b.timeouts.total_s = *v;
  if (auto v = doc.get_string(k + "api_key")) b.api_key = *v;
  if (auto var = doc.get_string(k + "api_key_env")) {
    if (const char* key = std::getenv(var->c_str()); key != nullptr) b.api_key = std::string(key);
  }
  if (b.kind == inference::BackendKind::kMock) {
    const double delay = doc.get_double(k + "mock_delay_ms").value_or(0.0);
    if (auto match = doc.get_string(k + "mock_match")) {
      b.mock_script.push_back({*match, doc.get_string(k + "mock_match_reply").value_or(""), delay});
    }
    b.mock_script.push_back(
        {std::nullopt, doc.get_string(k + "mock_reply").value_or("Take a short break and reflect on your day."),
         delay});
  }
  return b;
}

}  // namespace

AppConfig config_from_document(const ConfigDocument& doc, const std::filesystem::path& base_dir) {
  AppConfig cfg = default_config();
  if (auto v = doc.get_string("store_path")) cfg.store_path = resolve(base_dir, *v);
  else cfg.store_path = base_dir / cfg.store_path;
  if (auto v = doc.get_string("rules_path")) cfg.rules_path = resolve(base_dir, *v);
  if (auto v = doc.get_string("timezone")) cfg.timezone = *v;
  if (auto v = doc.get_string("default_backend")) cfg.default_backend = *v;
  if (auto v = doc.get_string("device_id")) cfg.device_id = *v;
  if (auto v = doc.get_int("grace_minutes")) cfg.grace_ms = *v * kMsPerMinute;
  if (auto v = doc.get_int("port")) cfg.port = static_cast<int>(*v);

  auto& pl = cfg.pipeline;
  if (auto v = doc.get_int("digest.budget")) pl.digest_budget = static_cast<int>(*v);
  if (auto v = doc.get_string("digest.method")) {
    if (*v != "extractive" && *v != "llm") throw ConfigError("digest.method must be 'extractive' or 'llm'");
    pl.llm_digest = *v == "llm";
  }
  if (auto v = doc.get_int("generation.max_tokens")) pl.params.max_tokens = static_cast<int>(*v);
  if (auto v = doc.get_double("generation.temperature")) pl.params.temperature = *v;
  if (auto v = doc.get_int("generation.seed")) pl.params.seed = *v;
  if (auto v = doc.get_int("pipeline.window_hours")) pl.default_window_hours = static_cast<int>(*v);
  if (auto v = doc.get_decimal("energy.joules_per_token_per_billion")) {
    if (*v <= Decimal(0)) throw ConfigError("energy.joules_per_token_per_billion must be > 0");
    pl.energy.joules_per_token_per_billion = *v;
  }
  if (auto v = doc.get_string("prompt.instruction")) pl.prompt.instruction = *v;
  if (auto v = doc.get_string("prompt.domain")) pl.prompt.c_domain = *v;
  if (auto v = doc.get_string("prompt.question")) pl.prompt.question = *v;
  if (auto v = doc.get_string("prompt.output_format")) pl.prompt.output_format = *v;
  if (auto v = doc.get_string("user.user_id")) pl.user.user_id = *v;
  if (auto v = doc.get_string("user.display_name")) pl.user.display_name = *v;
  if (auto v = doc.get_list("user.descriptors")) pl.user.descriptors = *v;

  if (auto v = doc.get_string("probe.kind")) {
    if (*v == "none") cfg.probe.kind = ProbeKind::kNone;
    else if (*v == "system") cfg.probe.kind = ProbeKind::kSystem;
    else if (*v == "replay") cfg.probe.kind = ProbeKind::kReplay;
    else throw ConfigError("probe.kind must be none, system or replay");
  }
  cfg.probe.replay_sample.ram_pct = doc.get_double("probe.ram_pct").value_or(0.0);
  cfg.probe.replay_sample.battery_drop_pct = doc.get_double("probe.battery_drop_pct").value_or(0.0);
  cfg.probe.replay_sample.interval_min = doc.get_double("probe.interval_min").value_or(0.0);

  const auto ids = doc.children("backend");
  if (!ids.empty()) {
    cfg.backends.clear();
    for (const auto& id : ids) cfg.backends.push_back(backend_from_document(doc, id));
  }

  for (const auto& b : cfg.backends) {
    try {
      b.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (std::none_of(cfg.backends.begin(), cfg.backends.end(),
                   [&](const auto& b) { return b.backend_id == cfg.default_backend; })) {
    throw ConfigError("default_backend '" + cfg.default_backend + "' is not configured");
  }
  if (pl.digest_budget < 32) throw ConfigError("digest.budget must be >= 32");
  if (pl.params.max_tokens < 1) throw ConfigError("generation.max_tokens must be >= 1");
  try {
    orchestrator::local_hour(cfg.timezone, 0);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

AppConfig load_config(const std::optional<std::filesystem::path>& path,
                      const std::vector<std::pair<std::string, std::string>>& env) {
  ConfigDocument doc;
  std::filesystem::path base = std::filesystem::current_path();
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot read config file '" + path->string() + "'");
    doc = ConfigDocument::parse(std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()));
    base = std::filesystem::absolute(*path).parent_path();
  }
  doc.apply_env(env);
  return config_from_document(doc, base);
}

}  // namespace pocketpilot::gateway
