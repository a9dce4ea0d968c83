#include "pocketpilot/orchestrator/esm_queue.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>

#include "pocketpilot/orchestrator/schedule.hpp"

namespace pocketpilot::orchestrator {

Json to_json(const PendingQuestionnaire& p) {
  Json remaining = Json::array();
  for (const auto f : p.remaining) remaining.push_back(sensing::to_string(f));
  return Json{{"pending_id", p.pending_id},
              {"rule_id", p.rule_id},
              {"slot", sensing::to_string(p.slot)},
              {"delivered_at", p.delivered_at},
              {"remaining", remaining}};
}

EsmQueue::EsmQueue(store::EventStore& store, std::string timezone)
    : store_(store), timezone_(std::move(timezone)), log_(store.dir() / kPendingLog) {}

sensing::EsmSlot EsmQueue::slot_for(UtcMs t) const {
  return local_hour(timezone_, t) < 12 ? sensing::EsmSlot::kMorning : sensing::EsmSlot::kNight;
}

PendingQuestionnaire EsmQueue::deliver(const std::string& rule_id, UtcMs fire_time) {
  PendingQuestionnaire p;
  p.pending_id = "esm-" + rule_id + "-" + std::to_string(fire_time);
  p.rule_id = rule_id;
  p.slot = slot_for(fire_time);
  p.delivered_at = fire_time;
  p.remaining.assign(sensing::kAllFactors.begin(), sensing::kAllFactors.end());
  for (const auto& j : log_.read_all()) {
    if (j.value("pending_id", "") == p.pending_id) return p;
  }
  log_.append(Json{{"pending_id", p.pending_id},
                   {"rule_id", rule_id},
                   {"slot", sensing::to_string(p.slot)},
                   {"delivered_at", fire_time}});
  return p;
}

std::vector<PendingQuestionnaire> EsmQueue::pending() const {
  std::map<sensing::EsmSlot, PendingQuestionnaire> latest;
  std::vector<UtcMs> deliveries;
  for (const auto& j : log_.read_all()) {
    PendingQuestionnaire p;
    p.pending_id = j.at("pending_id").get<std::string>();
    p.rule_id = j.at("rule_id").get<std::string>();
    p.slot = sensing::parse_slot(j.at("slot").get<std::string>()).value_or(sensing::EsmSlot::kMorning);
    p.delivered_at = j.at("delivered_at").get<UtcMs>();
    deliveries.push_back(p.delivered_at);
    auto it = latest.find(p.slot);
    if (it == latest.end() || it->second.delivered_at < p.delivered_at) latest[p.slot] = p;
  }
  std::sort(deliveries.begin(), deliveries.end());

  std::vector<PendingQuestionnaire> out;
  for (auto& [slot, p] : latest) {
    // A delivery stays open until the next delivery of any slot.
    const auto next = std::upper_bound(deliveries.begin(), deliveries.end(), p.delivered_at);
    const UtcMs end = next == deliveries.end() ? std::numeric_limits<UtcMs>::max() : *next;
    const auto answers = store_.query_esm(p.delivered_at, end);
    for (const auto f : sensing::kAllFactors) {
      const bool answered = std::any_of(answers.begin(), answers.end(), [&](const sensing::EsmResponse& r) {
        return r.factor == f && r.slot == p.slot;
      });
      if (!answered) p.remaining.push_back(f);
    }
    if (!p.remaining.empty()) out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.delivered_at < b.delivered_at; });
  return out;
}

sensing::EsmResponse EsmQueue::answer(const EsmAnswer& a, UtcMs now) {
  if (a.scale_value && (*a.scale_value < 1 || *a.scale_value > 5)) {
    throw std::invalid_argument("scale_value must be within [1,5]");
  }
  const UtcMs ts = a.timestamp.value_or(now);
  if (ts <= 0) {
    throw std::invalid_argument("timestamp must be positive");
  }
  sensing::EsmSlot slot = slot_for(ts);
  if (a.slot) {
    slot = *a.slot;
  } else {
    for (const auto& p : pending()) {
      if (std::find(p.remaining.begin(), p.remaining.end(), a.factor) != p.remaining.end()) slot = p.slot;
    }
  }
  auto response = sensing::make_esm(a.device_id, ts, slot, a.factor, a.answer, a.scale_value);
  store_.append_events(std::vector<sensing::EsmResponse>{response});
  return response;
}

}  // namespace pocketpilot::orchestrator
