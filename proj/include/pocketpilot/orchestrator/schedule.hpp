#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pocketpilot/common/error.hpp"
#include "pocketpilot/common/json.hpp"
#include "pocketpilot/common/time.hpp"

namespace pocketpilot::orchestrator {

enum class TriggerKind { kEsmDelivery, kPipelineRun };

std::string_view to_string(TriggerKind kind);

struct TimeOfDay {
  int hour = 0;
  int minute = 0;

  // "HH:MM", 24-hour clock.
  static std::optional<TimeOfDay> parse(std::string_view text);
  std::string to_string() const;
  friend auto operator<=>(const TimeOfDay&, const TimeOfDay&) = default;
};

struct TriggerRule {
  std::string rule_id;
  TriggerKind kind = TriggerKind::kEsmDelivery;
  std::vector<TimeOfDay> times_of_day;
  std::string timezone = "UTC";  // IANA zone id
  int window_hours = 24;
  bool enabled = true;
};

class RuleDisabled : public Error {
 public:
  explicit RuleDisabled(const std::string& rule_id);
};

class InvalidRule : public Error {
 public:
  using Error::Error;
};

// Throws InvalidRule (bad times, unknown zone, window < 1).
void validate(const TriggerRule& rule);

Json to_json(const TriggerRule& rule);
TriggerRule rule_from_json(const Json& j);
std::vector<TriggerRule> parse_rules(const Json& doc);  // {"rules": [...]} or a bare array
std::vector<TriggerRule> load_rules(const std::filesystem::path& path);

// Smallest fire instant strictly after `now` for any of the rule's local
// times in its zone. Local times skipped by a DST gap fire at the shifted
// instant; repeated local times fire once at the earlier instant.
UtcMs next_fire(const TriggerRule& rule, UtcMs now);

// Local calendar helpers in the given zone.
UtcMs local_midnight(std::string_view timezone, UtcMs t);
int local_hour(std::string_view timezone, UtcMs t);
UtcMs local_to_utc(std::string_view timezone, int year, int month, int day, int hour, int minute);

// Reloads the rules file when its modification time changes.
class RulesWatcher {
 public:
  explicit RulesWatcher(std::filesystem::path path);
  // Returns true when the rules were (re)loaded by this call.
  bool poll();
  const std::vector<TriggerRule>& rules() const { return rules_; }

 private:
  std::filesystem::path path_;
  std::optional<std::filesystem::file_time_type> mtime_;
  std::vector<TriggerRule> rules_;
};

}  // namespace pocketpilot::orchestrator
