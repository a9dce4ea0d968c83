#include "pocketpilot/orchestrator/schedule.hpp"

#include <absl/time/time.h>
#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <limits>

namespace pocketpilot::orchestrator {

namespace {

absl::TimeZone load_zone(std::string_view name) {
  absl::TimeZone tz;
  if (!absl::LoadTimeZone(std::string(name), &tz)) {
    throw InvalidRule("unknown time zone '" + std::string(name) + "'");
  }
  return tz;
}

UtcMs to_ms(absl::Time t) { return absl::ToUnixMillis(t); }
absl::Time from_ms(UtcMs ms) { return absl::FromUnixMillis(ms); }

}  // namespace

std::string_view to_string(TriggerKind kind) {
  return kind == TriggerKind::kEsmDelivery ? "esm_delivery" : "pipeline_run";
}

std::optional<TimeOfDay> TimeOfDay::parse(std::string_view text) {
  if (text.size() != 5 || text[2] != ':') return std::nullopt;
  auto digit = [&](std::size_t i) -> int {
    const char c = text[i];
    return (c >= '0' && c <= '9') ? c - '0' : -1;
  };
  const int h1 = digit(0), h2 = digit(1), m1 = digit(3), m2 = digit(4);
  if (h1 < 0 || h2 < 0 || m1 < 0 || m2 < 0) return std::nullopt;
  const TimeOfDay t{h1 * 10 + h2, m1 * 10 + m2};
  if (t.hour > 23 || t.minute > 59) return std::nullopt;
  return t;
}

std::string TimeOfDay::to_string() const { return fmt::format("{:02}:{:02}", hour, minute); }

RuleDisabled::RuleDisabled(const std::string& rule_id) : Error("rule '" + rule_id + "' is disabled") {}

void validate(const TriggerRule& rule) {
  if (rule.rule_id.empty()) throw InvalidRule("rule_id must not be empty");
  if (rule.times_of_day.empty()) throw InvalidRule("rule '" + rule.rule_id + "' has no times_of_day");
  if (rule.window_hours < 1) throw InvalidRule("rule '" + rule.rule_id + "' needs window_hours >= 1");
  load_zone(rule.timezone);
}

Json to_json(const TriggerRule& rule) {
  Json times = Json::array();
  for (const auto& t : rule.times_of_day) times.push_back(t.to_string());
  return Json{{"rule_id", rule.rule_id},
              {"kind", to_string(rule.kind)},
              {"times_of_day", times},
              {"timezone", rule.timezone},
              {"window_hours", rule.window_hours},
              {"enabled", rule.enabled}};
}

TriggerRule rule_from_json(const Json& j) {
  TriggerRule r;
  try {
    r.rule_id = j.at("rule_id").get<std::string>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "esm_delivery") {
      r.kind = TriggerKind::kEsmDelivery;
    } else if (kind == "pipeline_run") {
      r.kind = TriggerKind::kPipelineRun;
    } else {
      throw InvalidRule("unknown rule kind '" + kind + "'");
    }
    for (const auto& t : j.at("times_of_day")) {
      const auto parsed = TimeOfDay::parse(t.get<std::string>());
      if (!parsed) throw InvalidRule("invalid time of day '" + t.get<std::string>() + "'");
      r.times_of_day.push_back(*parsed);
    }
    r.timezone = j.value("timezone", std::string("UTC"));
    r.window_hours = j.value("window_hours", 24);
    r.enabled = j.value("enabled", true);
  } catch (const Json::exception& e) {
    throw InvalidRule(std::string("malformed rule: ") + e.what());
  }
  std::sort(r.times_of_day.begin(), r.times_of_day.end());
  validate(r);
  return r;
}

std::vector<TriggerRule> parse_rules(const Json& doc) {
  const Json& list = doc.is_object() ? doc.at("rules") : doc;
  if (!list.is_array()) throw InvalidRule("rules document must be an array or {\"rules\": [...]}");
  std::vector<TriggerRule> out;
  for (const auto& j : list) out.push_back(rule_from_json(j));
  return out;
}

std::vector<TriggerRule> load_rules(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidRule("cannot open rules file '" + path.string() + "'");
  try {
    return parse_rules(Json::parse(in));
  } catch (const Json::parse_error& e) {
    throw InvalidRule("rules file '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

UtcMs next_fire(const TriggerRule& rule, UtcMs now) {
  if (!rule.enabled) throw RuleDisabled(rule.rule_id);
  if (rule.times_of_day.empty()) throw InvalidRule("rule '" + rule.rule_id + "' has no times_of_day");
  const absl::TimeZone tz = load_zone(rule.timezone);
  const absl::CivilDay today = absl::ToCivilDay(from_ms(now), tz);
  UtcMs best = std::numeric_limits<UtcMs>::max();
  // Two local days ahead always contains a candidate; start a day back so
  // zone offsets larger than the distance to midnight are covered.
  for (int d = -1; d <= 2; ++d) {
    const absl::CivilDay day = today + d;
    for (const auto& t : rule.times_of_day) {
      const absl::CivilSecond cs(day.year(), day.month(), day.day(), t.hour, t.minute, 0);
      const UtcMs candidate = to_ms(absl::FromCivil(cs, tz));
      if (candidate > now && candidate < best) best = candidate;
    }
  }
  return best;
}

UtcMs local_midnight(std::string_view timezone, UtcMs t) {
  const absl::TimeZone tz = load_zone(timezone);
  return to_ms(absl::FromCivil(absl::ToCivilDay(from_ms(t), tz), tz));
}

int local_hour(std::string_view timezone, UtcMs t) {
  const absl::TimeZone tz = load_zone(timezone);
  return absl::ToCivilHour(from_ms(t), tz).hour();
}

UtcMs local_to_utc(std::string_view timezone, int year, int month, int day, int hour, int minute) {
  const absl::TimeZone tz = load_zone(timezone);
  return to_ms(absl::FromCivil(absl::CivilSecond(year, month, day, hour, minute, 0), tz));
}

RulesWatcher::RulesWatcher(std::filesystem::path path) : path_(std::move(path)) {}

bool RulesWatcher::poll() {
  std::error_code ec;
  const auto mtime = std::filesystem::last_write_time(path_, ec);
  if (ec) {
    return false;
  }
  if (mtime_ && *mtime_ == mtime) {
    return false;
  }
  rules_ = load_rules(path_);
  mtime_ = mtime;
  return true;
}

}  // namespace pocketpilot::orchestrator
