#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pocketpilot/common/json.hpp"
#include "pocketpilot/common/time.hpp"

namespace pocketpilot::sensing {

enum class EventKind { kScreentext, kEsm };

enum class EsmSlot { kMorning, kNight };

// The six questionnaire factors delivered in each ESM round.
enum class EsmFactor {
  kEmotionalStatus,
  kSleepDuration,
  kSleepQuality,
  kFatigue,
  kAlcoholConsumption,
  kSignificantEvent,
};

inline constexpr std::array<EsmFactor, 6> kAllFactors = {
    EsmFactor::kEmotionalStatus, EsmFactor::kSleepDuration,      EsmFactor::kSleepQuality,
    EsmFactor::kFatigue,         EsmFactor::kAlcoholConsumption, EsmFactor::kSignificantEvent,
};

std::string_view to_string(EventKind kind);
std::string_view to_string(EsmSlot slot);
std::string_view to_string(EsmFactor factor);
std::optional<EventKind> parse_event_kind(std::string_view text);
std::optional<EsmSlot> parse_slot(std::string_view text);
std::optional<EsmFactor> parse_factor(std::string_view text);

struct ScreentextEvent {
  std::string event_id;
  std::string device_id;
  UtcMs timestamp = 0;
  std::string package_name;
  std::string text;

  friend bool operator==(const ScreentextEvent&, const ScreentextEvent&) = default;
};

struct EsmResponse {
  std::string event_id;
  std::string device_id;
  UtcMs timestamp = 0;
  EsmSlot slot = EsmSlot::kMorning;
  EsmFactor factor = EsmFactor::kEmotionalStatus;
  std::string answer;
  std::optional<int> scale_value;

  friend bool operator==(const EsmResponse&, const EsmResponse&) = default;
};

using SensorEvent = std::variant<ScreentextEvent, EsmResponse>;

struct UserProfile {
  std::string user_id;
  std::string display_name;
  std::vector<std::string> descriptors;
};

// Builders that fill in event_id from the other fields.
ScreentextEvent make_screentext(std::string device_id, UtcMs timestamp, std::string package_name,
                                std::string text);
EsmResponse make_esm(std::string device_id, UtcMs timestamp, EsmSlot slot, EsmFactor factor,
                     std::string answer, std::optional<int> scale_value);

// Export-format records (no event_id; ids are always recomputed on ingest).
Json to_export_json(const ScreentextEvent& e);
Json to_export_json(const EsmResponse& e);

// Full records including event_id, used by the service API.
Json to_json(const ScreentextEvent& e);
Json to_json(const EsmResponse& e);
Json to_json(const UserProfile& p);

UtcMs timestamp_of(const SensorEvent& e);
const std::string& event_id_of(const SensorEvent& e);

}  // namespace pocketpilot::sensing
