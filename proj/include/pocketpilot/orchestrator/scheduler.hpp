#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pocketpilot/common/clock.hpp"
#include "pocketpilot/common/json.hpp"
#include "pocketpilot/orchestrator/schedule.hpp"

namespace pocketpilot::orchestrator {

enum class FireOutcome { kExecuted, kCaughtUp, kSkipped };

std::string_view to_string(FireOutcome o);

struct FireRecord {
  std::string rule_id;
  UtcMs fire_time = 0;
  UtcMs handled_at = 0;
  FireOutcome outcome = FireOutcome::kExecuted;
  std::string note;  // handler error, if any
};

Json to_json(const FireRecord& r);

using FireHandler = std::function<void(const TriggerRule& rule, UtcMs fire_time, UtcMs now)>;
using LogSink = std::function<void(const std::string& line)>;

struct SchedulerOptions {
  // Missed fires older than this at resume time are skipped.
  UtcMs grace_ms = 30 * kMsPerMinute;
  LogSink log;
};

// Executes each due fire of every enabled rule exactly once, in time order.
// Progress is tracked per rule as a cursor (the instant through which the
// rule has been handled); with a state file the cursors survive restarts.
class Scheduler {
 public:
  Scheduler(std::vector<TriggerRule> rules, FireHandler handler, SchedulerOptions options = {},
            std::optional<std::filesystem::path> state_file = std::nullopt);

  // Replaces the rule set; new rules start from the next tick.
  void set_rules(std::vector<TriggerRule> rules);
  const std::vector<TriggerRule>& rules() const { return rules_; }

  // Handles every fire in (cursor, now]. Rules seen for the first time are
  // anchored at `now` and fire only later.
  std::vector<FireRecord> tick(UtcMs now);

  // Earliest pending fire across enabled, anchored rules.
  std::optional<UtcMs> next_due() const;

  // Ticks at every due instant up to and including `until`, sleeping on the
  // clock in between.
  std::vector<FireRecord> run_until(Clock& clock, UtcMs until);

  std::optional<UtcMs> cursor(const std::string& rule_id) const;
  void set_cursor(const std::string& rule_id, UtcMs t);

 private:
  void save_state() const;

  std::vector<TriggerRule> rules_;
  FireHandler handler_;
  SchedulerOptions options_;
  std::optional<std::filesystem::path> state_file_;
  std::map<std::string, UtcMs> cursors_;
};

// Fresh scheduler anchored at clock.now_ms(), driven until `until`.
std::vector<FireRecord> run_scheduler(const std::vector<TriggerRule>& rules, Clock& clock, UtcMs until,
                                      FireHandler handler, SchedulerOptions options = {});

}  // namespace pocketpilot::orchestrator
