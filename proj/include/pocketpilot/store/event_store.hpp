#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "pocketpilot/common/error.hpp"
#include "pocketpilot/common/json.hpp"
#include "pocketpilot/common/time.hpp"
#include "pocketpilot/metering/meter.hpp"
#include "pocketpilot/sensing/events.hpp"
#include "pocketpilot/store/jsonl_log.hpp"

namespace pocketpilot::store {

class InvalidWindow : public Error {
 public:
  InvalidWindow(UtcMs t0, UtcMs t1);
};

class InvalidRecord : public Error {
 public:
  using Error::Error;
};

struct StoredRecommendation {
  std::string rec_id;
  UtcMs created_at = 0;
  std::string prompt_digest;
  std::string response_text;
  std::string backend_id;
  metering::MeterReport meter;
};

Json to_json(const StoredRecommendation& r);
StoredRecommendation recommendation_from_json(const Json& j);

// Directory-backed store: screentext.log, esm.log and recommendations.log,
// plus an in-memory index rebuilt on open. One writer at a time; readers
// never observe a partially applied append.
class EventStore {
 public:
  static constexpr const char* kScreentextLog = "screentext.log";
  static constexpr const char* kEsmLog = "esm.log";
  static constexpr const char* kRecommendationsLog = "recommendations.log";

  explicit EventStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }

  // Returns how many events were new; already-present event ids are skipped.
  std::size_t append_events(const std::vector<sensing::ScreentextEvent>& events);
  std::size_t append_events(const std::vector<sensing::EsmResponse>& events);

  // Events with t0 <= timestamp < t1, ascending by (timestamp, event_id).
  std::vector<sensing::ScreentextEvent> query_screentext(UtcMs t0, UtcMs t1) const;
  std::vector<sensing::EsmResponse> query_esm(UtcMs t0, UtcMs t1) const;
  std::vector<sensing::SensorEvent> query_window(sensing::EventKind kind, UtcMs t0, UtcMs t1) const;

  std::size_t event_count(sensing::EventKind kind) const;

  std::string append_recommendation(const StoredRecommendation& rec);
  // Newest first; `before` keeps only records created strictly earlier.
  std::vector<StoredRecommendation> list_recommendations(std::size_t limit,
                                                         std::optional<UtcMs> before = std::nullopt) const;
  std::optional<StoredRecommendation> find_recommendation(const std::string& rec_id) const;

  // SHA-256 over every log file's bytes.
  std::string fingerprint() const;

  // Opens (or creates) an auxiliary log inside the store directory.
  JsonlLog aux_log(const std::string& file_name) const;

 private:
  using Key = std::pair<UtcMs, std::string>;

  std::filesystem::path dir_;
  JsonlLog screentext_log_;
  JsonlLog esm_log_;
  JsonlLog recommendations_log_;

  mutable std::shared_mutex mu_;
  std::map<Key, sensing::ScreentextEvent> screentext_;
  std::map<Key, sensing::EsmResponse> esm_;
  std::vector<StoredRecommendation> recommendations_;  // insertion order
  std::unordered_set<std::string> rec_ids_;
};

}  // namespace pocketpilot::store
