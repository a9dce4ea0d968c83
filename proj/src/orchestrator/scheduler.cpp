#include "pocketpilot/orchestrator/scheduler.hpp"

#include <algorithm>
#include <fstream>
#include <tuple>

namespace pocketpilot::orchestrator {

std::string_view to_string(FireOutcome o) {
  switch (o) {
    case FireOutcome::kExecuted:
      return "executed";
    case FireOutcome::kCaughtUp:
      return "caught_up";
    case FireOutcome::kSkipped:
      return "skipped";
  }
  return "executed";
}

Json to_json(const FireRecord& r) {
  Json j{{"rule_id", r.rule_id},
         {"fire_time", r.fire_time},
         {"handled_at", r.handled_at},
         {"outcome", to_string(r.outcome)}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

Scheduler::Scheduler(std::vector<TriggerRule> rules, FireHandler handler, SchedulerOptions options,
                     std::optional<std::filesystem::path> state_file)
    : rules_(std::move(rules)),
      handler_(std::move(handler)),
      options_(std::move(options)),
      state_file_(std::move(state_file)) {
  if (state_file_) {
    std::ifstream in(*state_file_);
    if (in) {
      try {
        const Json doc = Json::parse(in);
        for (const auto& [id, t] : doc.at("cursors").items()) cursors_[id] = t.get<UtcMs>();
      } catch (const Json::exception&) {
        // Unreadable state: every rule is re-anchored at the next tick.
        cursors_.clear();
      }
    }
  }
}

void Scheduler::set_rules(std::vector<TriggerRule> rules) { rules_ = std::move(rules); }

std::optional<UtcMs> Scheduler::cursor(const std::string& rule_id) const {
  const auto it = cursors_.find(rule_id);
  if (it == cursors_.end()) return std::nullopt;
  return it->second;
}

void Scheduler::set_cursor(const std::string& rule_id, UtcMs t) {
  cursors_[rule_id] = t;
  save_state();
}

void Scheduler::save_state() const {
  if (!state_file_) return;
  Json cursors = Json::object();
  for (const auto& [id, t] : cursors_) cursors[id] = t;
  const auto tmp = state_file_->string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << Json{{"cursors", cursors}}.dump() << '\n';
  }
  std::error_code ec;
  std::filesystem::rename(tmp, *state_file_, ec);
}

std::vector<FireRecord> Scheduler::tick(UtcMs now) {
  struct Due {
    UtcMs fire_time;
    const TriggerRule* rule;
  };
  std::vector<Due> due;
  for (const auto& rule : rules_) {
    if (!rule.enabled) continue;
    auto it = cursors_.find(rule.rule_id);
    if (it == cursors_.end()) {
      cursors_[rule.rule_id] = now;
      continue;
    }
    for (UtcMs f = next_fire(rule, it->second); f <= now; f = next_fire(rule, f)) {
      due.push_back({f, &rule});
    }
  }
  std::sort(due.begin(), due.end(), [](const Due& a, const Due& b) {
    return std::tie(a.fire_time, a.rule->rule_id) < std::tie(b.fire_time, b.rule->rule_id);
  });

  std::vector<FireRecord> fired;
  for (const auto& d : due) {
    FireRecord rec{d.rule->rule_id, d.fire_time, now, FireOutcome::kExecuted, {}};
    const UtcMs lag = now - d.fire_time;
    if (lag > options_.grace_ms) {
      rec.outcome = FireOutcome::kSkipped;
      if (options_.log) {
        options_.log("skipped missed fire of rule '" + rec.rule_id + "' at " + std::to_string(d.fire_time) +
                     " (" + std::to_string(lag / kMsPerMinute) + " min late)");
      }
    } else {
      rec.outcome = lag == 0 ? FireOutcome::kExecuted : FireOutcome::kCaughtUp;
      try {
        handler_(*d.rule, d.fire_time, now);
      } catch (const std::exception& e) {
        rec.note = e.what();
        if (options_.log) options_.log("rule '" + rec.rule_id + "' handler failed: " + rec.note);
      }
    }
    cursors_[d.rule->rule_id] = d.fire_time;
    save_state();
    fired.push_back(std::move(rec));
  }
  for (const auto& rule : rules_) {
    if (rule.enabled) cursors_[rule.rule_id] = std::max(cursors_[rule.rule_id], now);
  }
  save_state();
  return fired;
}

std::optional<UtcMs> Scheduler::next_due() const {
  std::optional<UtcMs> best;
  for (const auto& rule : rules_) {
    if (!rule.enabled) continue;
    const auto it = cursors_.find(rule.rule_id);
    if (it == cursors_.end()) continue;
    const UtcMs f = next_fire(rule, it->second);
    if (!best || f < *best) best = f;
  }
  return best;
}

std::vector<FireRecord> Scheduler::run_until(Clock& clock, UtcMs until) {
  std::vector<FireRecord> all = tick(clock.now_ms());
  while (true) {
    const auto due = next_due();
    if (!due || *due > until) break;
    clock.sleep_until(*due);
    auto batch = tick(clock.now_ms());
    all.insert(all.end(), batch.begin(), batch.end());
  }
  return all;
}

std::vector<FireRecord> run_scheduler(const std::vector<TriggerRule>& rules, Clock& clock, UtcMs until,
                                      FireHandler handler, SchedulerOptions options) {
  Scheduler scheduler(rules, std::move(handler), std::move(options));
  return scheduler.run_until(clock, until);
}

}  // namespace pocketpilot::orchestrator
