#include "pocketpilot/sensing/events.hpp"

#include "pocketpilot/sensing/fingerprint.hpp"

namespace pocketpilot::sensing {

namespace {

constexpr std::array<std::string_view, 6> kFactorNames = {
    "emotional_status", "sleep_duration",      "sleep_quality",
    "fatigue",          "alcohol_consumption", "significant_event",
};

std::string esm_payload(EsmSlot slot, const std::string& answer, std::optional<int> scale) {
  std::string payload(to_string(slot));
  payload += '\n';
  payload += scale ? std::to_string(*scale) : "-";
  payload += '\n';
  payload += answer;
  return payload;
}

}  // namespace

std::string_view to_string(EventKind kind) {
  return kind == EventKind::kScreentext ? "screentext" : "esm";
}

std::string_view to_string(EsmSlot slot) { return slot == EsmSlot::kMorning ? "morning" : "night"; }

std::string_view to_string(EsmFactor factor) {
  return kFactorNames[static_cast<std::size_t>(factor)];
}

std::optional<EventKind> parse_event_kind(std::string_view text) {
  if (text == "screentext") return EventKind::kScreentext;
  if (text == "esm") return EventKind::kEsm;
  return std::nullopt;
}

std::optional<EsmSlot> parse_slot(std::string_view text) {
  if (text == "morning") return EsmSlot::kMorning;
  if (text == "night") return EsmSlot::kNight;
  return std::nullopt;
}

std::optional<EsmFactor> parse_factor(std::string_view text) {
  for (std::size_t i = 0; i < kFactorNames.size(); ++i) {
    if (kFactorNames[i] == text) {
      return kAllFactors[i];
    }
  }
  return std::nullopt;
}

ScreentextEvent make_screentext(std::string device_id, UtcMs timestamp, std::string package_name,
                                std::string text) {
  ScreentextEvent e;
  e.event_id = event_fingerprint(device_id, timestamp, package_name, text);
  e.device_id = std::move(device_id);
  e.timestamp = timestamp;
  e.package_name = std::move(package_name);
  e.text = std::move(text);
  return e;
}

EsmResponse make_esm(std::string device_id, UtcMs timestamp, EsmSlot slot, EsmFactor factor,
                     std::string answer, std::optional<int> scale_value) {
  EsmResponse e;
  e.event_id = event_fingerprint(device_id, timestamp, to_string(factor),
                                 esm_payload(slot, answer, scale_value));
  e.device_id = std::move(device_id);
  e.timestamp = timestamp;
  e.slot = slot;
  e.factor = factor;
  e.answer = std::move(answer);
  e.scale_value = scale_value;
  return e;
}

Json to_export_json(const ScreentextEvent& e) {
  return Json{{"device_id", e.device_id},
              {"timestamp", e.timestamp},
              {"package_name", e.package_name},
              {"text", e.text}};
}

Json to_export_json(const EsmResponse& e) {
  Json j{{"device_id", e.device_id},
         {"timestamp", e.timestamp},
         {"slot", to_string(e.slot)},
         {"factor", to_string(e.factor)},
         {"answer", e.answer}};
  if (e.scale_value) {
    j["scale_value"] = *e.scale_value;
  }
  return j;
}

Json to_json(const ScreentextEvent& e) {
  Json j{{"event_id", e.event_id}, {"kind", "screentext"}};
  j.update(to_export_json(e));
  return j;
}

Json to_json(const EsmResponse& e) {
  Json j{{"event_id", e.event_id}, {"kind", "esm"}};
  j.update(to_export_json(e));
  return j;
}

Json to_json(const UserProfile& p) {
  return Json{{"user_id", p.user_id}, {"display_name", p.display_name}, {"descriptors", p.descriptors}};
}

UtcMs timestamp_of(const SensorEvent& e) {
  return std::visit([](const auto& ev) { return ev.timestamp; }, e);
}

const std::string& event_id_of(const SensorEvent& e) {
  return std::visit([](const auto& ev) -> const std::string& { return ev.event_id; }, e);
}

}  // namespace pocketpilot::sensing
