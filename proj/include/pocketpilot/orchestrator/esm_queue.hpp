#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pocketpilot/common/json.hpp"
#include "pocketpilot/sensing/events.hpp"
#include "pocketpilot/store/event_store.hpp"

namespace pocketpilot::orchestrator {

struct PendingQuestionnaire {
  std::string pending_id;
  std::string rule_id;
  sensing::EsmSlot slot = sensing::EsmSlot::kMorning;
  UtcMs delivered_at = 0;
  std::vector<sensing::EsmFactor> remaining;  // factors still unanswered
};

Json to_json(const PendingQuestionnaire& p);

struct EsmAnswer {
  std::string device_id = "local";
  sensing::EsmFactor factor = sensing::EsmFactor::kEmotionalStatus;
  std::string answer;
  std::optional<int> scale_value;
  std::optional<sensing::EsmSlot> slot;
  // Client-chosen timestamp makes resubmission idempotent.
  std::optional<UtcMs> timestamp;
};

// Deliveries are recorded in esm_pending.log; what is still pending is derived
// from the stored responses, so answering never rewrites a log.
class EsmQueue {
 public:
  static constexpr const char* kPendingLog = "esm_pending.log";

  EsmQueue(store::EventStore& store, std::string timezone);

  // Slot is morning before local noon, night otherwise. Idempotent per
  // (rule, fire time).
  PendingQuestionnaire deliver(const std::string& rule_id, UtcMs fire_time);

  // The latest delivery per slot, if it still has unanswered factors.
  std::vector<PendingQuestionnaire> pending() const;

  // Validates and stores the answer; slot defaults to the open questionnaire
  // asking this factor, else to the local time of day. Throws
  // std::invalid_argument on an out-of-range scale.
  sensing::EsmResponse answer(const EsmAnswer& a, UtcMs now);

  sensing::EsmSlot slot_for(UtcMs t) const;

 private:
  store::EventStore& store_;
  std::string timezone_;
  store::JsonlLog log_;
};

}  // namespace pocketpilot::orchestrator
