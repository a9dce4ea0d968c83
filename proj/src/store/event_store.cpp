#include "pocketpilot/store/event_store.hpp"

#include <algorithm>
#include <mutex>

#include "pocketpilot/common/hash.hpp"
#include "pocketpilot/sensing/ingest.hpp"

namespace pocketpilot::store {

namespace fs = std::filesystem;

InvalidWindow::InvalidWindow(UtcMs t0, UtcMs t1)
    : Error("invalid window [" + std::to_string(t0) + ", " + std::to_string(t1) + "): start must precede end") {}

Json to_json(const StoredRecommendation& r) {
  return Json{{"rec_id", r.rec_id},
              {"created_at", r.created_at},
              {"prompt_digest", r.prompt_digest},
              {"response_text", r.response_text},
              {"backend_id", r.backend_id},
              {"meter", metering::to_json(r.meter)}};
}

StoredRecommendation recommendation_from_json(const Json& j) {
  StoredRecommendation r;
  r.rec_id = j.at("rec_id").get<std::string>();
  r.created_at = j.at("created_at").get<UtcMs>();
  r.prompt_digest = j.at("prompt_digest").get<std::string>();
  r.response_text = j.at("response_text").get<std::string>();
  r.backend_id = j.at("backend_id").get<std::string>();
  r.meter = metering::meter_report_from_json(j.at("meter"));
  return r;
}

namespace {

template <typename Event, typename ParseFn>
void load_events(const JsonlLog& log, std::map<std::pair<UtcMs, std::string>, Event>& index, ParseFn parse) {
  std::size_t line_no = 0;
  for (const auto& line : log.read_lines()) {
    ++line_no;
    try {
      Event e = parse(Json::parse(line), line_no);
      index.emplace(std::make_pair(e.timestamp, e.event_id), std::move(e));
    } catch (const std::exception& e) {
      throw StorageFailure("corrupt record in '" + log.path().string() + "': " + e.what());
    }
  }
}

template <typename Event>
std::size_t append_into(JsonlLog& log, std::map<std::pair<UtcMs, std::string>, Event>& index,
                        const std::vector<Event>& events, std::shared_mutex& mu) {
  std::unique_lock lock(mu);
  std::vector<std::string> lines;
  std::vector<const Event*> fresh;
  std::unordered_set<std::string> batch_ids;
  for (const auto& e : events) {
    const auto key = std::make_pair(e.timestamp, e.event_id);
    if (index.contains(key) || !batch_ids.insert(e.event_id).second) {
      continue;
    }
    lines.push_back(sensing::to_export_json(e).dump());
    fresh.push_back(&e);
  }
  log.append_lines(lines);
  for (const Event* e : fresh) {
    index.emplace(std::make_pair(e->timestamp, e->event_id), *e);
  }
  return fresh.size();
}

template <typename Event>
std::vector<Event> query_range(const std::map<std::pair<UtcMs, std::string>, Event>& index, UtcMs t0, UtcMs t1) {
  if (t0 >= t1) {
    throw InvalidWindow(t0, t1);
  }
  std::vector<Event> out;
  for (auto it = index.lower_bound({t0, std::string()}); it != index.end() && it->first.first < t1; ++it) {
    out.push_back(it->second);
  }
  return out;
}

}  // namespace

EventStore::EventStore(fs::path dir)
    : dir_(std::move(dir)),
      screentext_log_(dir_ / kScreentextLog),
      esm_log_(dir_ / kEsmLog),
      recommendations_log_(dir_ / kRecommendationsLog) {
  load_events(screentext_log_, screentext_, sensing::parse_screentext_record);
  load_events(esm_log_, esm_, sensing::parse_esm_record);
  for (const auto& j : recommendations_log_.read_all()) {
    try {
      StoredRecommendation r = recommendation_from_json(j);
      rec_ids_.insert(r.rec_id);
      recommendations_.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw StorageFailure("corrupt recommendation in '" + recommendations_log_.path().string() + "': " + e.what());
    }
  }
}

std::size_t EventStore::append_events(const std::vector<sensing::ScreentextEvent>& events) {
  return append_into(screentext_log_, screentext_, events, mu_);
}

std::size_t EventStore::append_events(const std::vector<sensing::EsmResponse>& events) {
  return append_into(esm_log_, esm_, events, mu_);
}

std::vector<sensing::ScreentextEvent> EventStore::query_screentext(UtcMs t0, UtcMs t1) const {
  std::shared_lock lock(mu_);
  return query_range(screentext_, t0, t1);
}

std::vector<sensing::EsmResponse> EventStore::query_esm(UtcMs t0, UtcMs t1) const {
  std::shared_lock lock(mu_);
  return query_range(esm_, t0, t1);
}

std::vector<sensing::SensorEvent> EventStore::query_window(sensing::EventKind kind, UtcMs t0, UtcMs t1) const {
  std::vector<sensing::SensorEvent> out;
  if (kind == sensing::EventKind::kScreentext) {
    for (auto& e : query_screentext(t0, t1)) out.emplace_back(std::move(e));
  } else {
    for (auto& e : query_esm(t0, t1)) out.emplace_back(std::move(e));
  }
  return out;
}

std::size_t EventStore::event_count(sensing::EventKind kind) const {
  std::shared_lock lock(mu_);
  return kind == sensing::EventKind::kScreentext ? screentext_.size() : esm_.size();
}

std::string EventStore::append_recommendation(const StoredRecommendation& rec) {
  std::unique_lock lock(mu_);
  if (rec.rec_id.empty()) {
    throw InvalidRecord("recommendation needs a rec_id");
  }
  if (rec_ids_.contains(rec.rec_id)) {
    throw InvalidRecord("duplicate rec_id '" + rec.rec_id + "'");
  }
  if (!recommendations_.empty() && rec.created_at < recommendations_.back().created_at) {
    throw InvalidRecord("created_at must not go backwards");
  }
  recommendations_log_.append(to_json(rec));
  rec_ids_.insert(rec.rec_id);
  recommendations_.push_back(rec);
  return rec.rec_id;
}

std::vector<StoredRecommendation> EventStore::list_recommendations(std::size_t limit,
                                                                   std::optional<UtcMs> before) const {
  std::shared_lock lock(mu_);
  std::vector<StoredRecommendation> out;
  for (auto it = recommendations_.rbegin(); it != recommendations_.rend() && out.size() < limit; ++it) {
    if (before && it->created_at >= *before) continue;
    out.push_back(*it);
  }
  return out;
}

std::optional<StoredRecommendation> EventStore::find_recommendation(const std::string& rec_id) const {
  std::shared_lock lock(mu_);
  for (const auto& r : recommendations_) {
    if (r.rec_id == rec_id) return r;
  }
  return std::nullopt;
}

std::string EventStore::fingerprint() const {
  std::shared_lock lock(mu_);
  Sha256 h;
  for (const JsonlLog* log : {&screentext_log_, &esm_log_, &recommendations_log_}) {
    const std::string data = log->contents();
    h.update(log->path().filename().string());
    h.update(std::string(1, '\0'));
    h.update(std::to_string(data.size()));
    h.update(std::string(1, '\0'));
    h.update(data);
  }
  return h.hex_digest();
}

JsonlLog EventStore::aux_log(const std::string& file_name) const { return JsonlLog(dir_ / file_name); }

}  // namespace pocketpilot::store
