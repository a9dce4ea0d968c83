#include "pocketpilot/gateway/app.hpp"

#include <absl/time/time.h>

#include <charconv>

#include "pocketpilot/common/decimal.hpp"
#include "pocketpilot/digest/digester.hpp"
#include "pocketpilot/inference/factory.hpp"
#include "pocketpilot/prompt/assembler.hpp"
#include "pocketpilot/sensing/ingest.hpp"

namespace pocketpilot::gateway {

std::string_view to_string(ApiCode code) {
  switch (code) {
    case ApiCode::kBadRequest: return "bad_request";
    case ApiCode::kNotFound: return "not_found";
    case ApiCode::kConflict: return "conflict";
    case ApiCode::kBackendFailure: return "backend_failure";
    case ApiCode::kStorageFailure: return "storage_failure";
  }
  return "storage_failure";
}

int http_status(ApiCode code) {
  switch (code) {
    case ApiCode::kBadRequest: return 400;
    case ApiCode::kNotFound: return 404;
    case ApiCode::kConflict: return 409;
    case ApiCode::kBackendFailure: return 502;
    case ApiCode::kStorageFailure: return 500;
  }
  return 500;
}

Json ApiError::to_json() const {
  return Json{{"error", Json{{"code", gateway::to_string(code_)}, {"message", what()}}}};
}

ApiError current_api_error() {
  try {
    throw;
  } catch (const ApiError& e) {
    return e;
  } catch (const store::InvalidRecord& e) {
    return ApiError(ApiCode::kConflict, e.what());
  } catch (const store::StorageFailure& e) {
    return ApiError(ApiCode::kStorageFailure, e.what());
  } catch (const inference::InferenceError& e) {
    return ApiError(ApiCode::kBackendFailure, e.what());
  } catch (const inference::TransportFailure& e) {
    return ApiError(ApiCode::kBackendFailure, e.what());
  } catch (const metering::EmptyInput& e) {
    return ApiError(ApiCode::kNotFound, e.what());
  } catch (const Error& e) {
    return ApiError(ApiCode::kBadRequest, e.what());
  } catch (const Json::exception& e) {
    return ApiError(ApiCode::kBadRequest, std::string("invalid JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    return ApiError(ApiCode::kBadRequest, e.what());
  } catch (const std::exception& e) {
    return ApiError(ApiCode::kStorageFailure, e.what());
  }
}

UtcMs parse_time_arg(std::string_view text) {
  UtcMs ms = 0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), ms);
  if (ec == std::errc() && p == text.data() + text.size()) return ms;
  absl::Time t;
  std::string err;
  if (!absl::ParseTime(absl::RFC3339_full, std::string(text), &t, &err)) {
    throw ApiError(ApiCode::kBadRequest, "invalid time '" + std::string(text) + "': expected ms or RFC 3339");
  }
  return absl::ToUnixMillis(t);
}

namespace {

std::unique_ptr<metering::ResourceProbe> make_probe(const ProbeSettings& s, Clock& clock) {
  switch (s.kind) {
    case ProbeKind::kNone: return nullptr;
    case ProbeKind::kSystem: return std::make_unique<metering::SystemProbe>(clock);
    case ProbeKind::kReplay:
      return std::make_unique<metering::ReplayProbe>(std::vector<metering::ResourceSample>{s.replay_sample});
  }
  return nullptr;
}

sensing::EventKind require_kind(std::string_view kind) {
  const auto k = sensing::parse_event_kind(kind);
  if (!k) throw ApiError(ApiCode::kBadRequest, "unknown event kind '" + std::string(kind) + "'");
  return *k;
}

template <typename T>
std::optional<T> opt_field(const Json& body, const char* key) {
  const auto it = body.find(key);
  if (it == body.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const Json::exception&) {
    throw ApiError(ApiCode::kBadRequest, std::string("field '") + key + "' has the wrong type");
  }
}

void require_object(const Json& body) {
  if (!body.is_object()) throw ApiError(ApiCode::kBadRequest, "request body must be a JSON object");
}

}  // namespace

App::App(AppConfig config, Clock& clock, std::shared_ptr<inference::HttpTransport> transport)
    : config_(std::move(config)), clock_(clock) {
  store_ = std::make_unique<store::EventStore>(config_.store_path);
  probe_ = make_probe(config_.probe, clock_);
  pipeline_ = std::make_unique<orchestrator::Pipeline>(*store_, clock_, config_.pipeline, probe_.get());
  esm_ = std::make_unique<orchestrator::EsmQueue>(*store_, config_.timezone);
  for (const auto& b : config_.backends) backends_[b.backend_id] = inference::make_backend(b, clock_, transport);

  std::vector<orchestrator::TriggerRule> rules;
  if (config_.rules_path) rules = orchestrator::load_rules(*config_.rules_path);
  orchestrator::SchedulerOptions opts;
  opts.grace_ms = config_.grace_ms;
  opts.log = [this](const std::string& line) {
    store_->aux_log("scheduler.log").append(Json{{"at", clock_.now_ms()}, {"message", line}});
  };
  scheduler_ = std::make_unique<orchestrator::Scheduler>(
      std::move(rules), [this](const auto& rule, UtcMs fire, UtcMs now) { on_fire(rule, fire, now); }, opts,
      config_.store_path / "scheduler_state.json");
}

inference::Backend& App::backend(const std::string& id) {
  const auto it = backends_.find(id);
  if (it == backends_.end()) throw ApiError(ApiCode::kNotFound, "unknown backend '" + id + "'");
  return *it->second;
}

Json App::health() const {
  Json backends = Json::array();
  for (const auto& b : config_.backends) backends.push_back(b.backend_id);
  return Json{{"status", "ok"},
              {"now", clock_.now_ms()},
              {"default_backend", config_.default_backend},
              {"backends", backends},
              {"events", Json{{"screentext", store_->event_count(sensing::EventKind::kScreentext)},
                              {"esm", store_->event_count(sensing::EventKind::kEsm)}}}};
}

Json App::ingest(std::string_view kind, std::string_view data) {
  const auto k = require_kind(kind);
  std::size_t received = 0;
  std::size_t inserted = 0;
  if (k == sensing::EventKind::kScreentext) {
    const auto events = sensing::ingest_screentext(data);
    received = events.size();
    inserted = store_->append_events(events);
  } else {
    const auto events = sensing::ingest_esm(data);
    received = events.size();
    inserted = store_->append_events(events);
  }
  return Json{{"kind", sensing::to_string(k)}, {"received", received}, {"inserted", inserted}};
}

Json App::events(std::string_view kind, UtcMs from, UtcMs to) const {
  const auto k = require_kind(kind);
  Json list = Json::array();
  for (const auto& e : store_->query_window(k, from, to)) {
    std::visit([&](const auto& ev) { list.push_back(sensing::to_json(ev)); }, e);
  }
  return Json{{"kind", sensing::to_string(k)}, {"from", from}, {"to", to}, {"events", list}};
}

Json App::digest(UtcMs from, UtcMs to, std::optional<int> budget) const {
  if (from >= to) throw store::InvalidWindow(from, to);
  digest::DigestOptions opts;
  opts.t0 = from;
  opts.t1 = to;
  opts.budget = budget.value_or(config_.pipeline.digest_budget);
  opts.params = config_.pipeline.params;
  if (config_.pipeline.llm_digest) opts.backend = backends_.at(config_.default_backend).get();
  return digest::to_json(digest::digest_window(store_->query_screentext(from, to), store_->query_esm(from, to), opts));
}

Json App::esm_pending() const {
  Json list = Json::array();
  for (const auto& p : esm_->pending()) list.push_back(orchestrator::to_json(p));
  return Json{{"pending", list}};
}

Json App::esm_answer(const Json& body) {
  require_object(body);
  orchestrator::EsmAnswer a;
  a.device_id = opt_field<std::string>(body, "device_id").value_or(config_.device_id);
  const auto factor = opt_field<std::string>(body, "factor");
  if (!factor) throw ApiError(ApiCode::kBadRequest, "missing field 'factor'");
  const auto f = sensing::parse_factor(*factor);
  if (!f) throw ApiError(ApiCode::kBadRequest, "unknown factor '" + *factor + "'");
  a.factor = *f;
  const auto answer = opt_field<std::string>(body, "answer");
  if (!answer) throw ApiError(ApiCode::kBadRequest, "missing field 'answer'");
  a.answer = *answer;
  a.scale_value = opt_field<int>(body, "scale_value");
  if (const auto slot = opt_field<std::string>(body, "slot")) {
    a.slot = sensing::parse_slot(*slot);
    if (!a.slot) throw ApiError(ApiCode::kBadRequest, "unknown slot '" + *slot + "'");
  }
  a.timestamp = opt_field<UtcMs>(body, "timestamp");
  return sensing::to_json(esm_->answer(a, clock_.now_ms()));
}

Json App::prompt_preview(const Json& body) const {
  require_object(body);
  orchestrator::PromptDraft draft;
  draft.instruction = opt_field<std::string>(body, "instruction");
  draft.c_user = opt_field<std::string>(body, "user_context");
  draft.c_domain = opt_field<std::string>(body, "domain_context");
  draft.question = opt_field<std::string>(body, "question");
  draft.output_format = opt_field<std::string>(body, "output_format");
  const std::string backend_id = opt_field<std::string>(body, "backend").value_or(config_.default_backend);
  const auto it = backends_.find(backend_id);
  if (it == backends_.end()) throw ApiError(ApiCode::kNotFound, "unknown backend '" + backend_id + "'");
  const int reserve = config_.pipeline.params.max_tokens;
  const auto budget_override = opt_field<int>(body, "budget");
  const int total = budget_override ? *budget_override + reserve : it->second->config().context_tokens;
  const auto budget = prompt::TokenBudget::make(total, reserve);
  const UtcMs to = opt_field<UtcMs>(body, "to").value_or(clock_.now_ms());
  const int hours = opt_field<int>(body, "window_hours").value_or(config_.pipeline.default_window_hours);
  if (hours < 1) throw ApiError(ApiCode::kBadRequest, "window_hours must be >= 1");
  const UtcMs from = opt_field<UtcMs>(body, "from").value_or(to - hours * kMsPerHour);
  if (from >= to) throw store::InvalidWindow(from, to);
  const auto prepared = pipeline_->prepare(from, to, draft, budget, nullptr);
  Json j = prompt::to_json(prepared.prompt);
  j["digest"] = digest::to_json(prepared.digest);
  return j;
}

Json App::run(const Json& body) {
  const Json b = body.is_null() ? Json::object() : body;
  require_object(b);
  const std::string backend_id = opt_field<std::string>(b, "backend").value_or(config_.default_backend);
  auto& be = backend(backend_id);
  orchestrator::RunRequest req;
  req.window_hours = opt_field<int>(b, "window_hours");
  req.question = opt_field<std::string>(b, "question");
  const auto result = pipeline_->run(req, be, clock_.now_ms());
  Json j = orchestrator::to_json(result);
  if (result.rec_id) {
    if (const auto rec = store_->find_recommendation(*result.rec_id)) j["recommendation"] = store::to_json(*rec);
  }
  return j;
}

Json App::get_run(const std::string& run_id) const {
  const auto run = pipeline_->find_run(run_id);
  if (!run) throw ApiError(ApiCode::kNotFound, "unknown run '" + run_id + "'");
  Json j = orchestrator::to_json(*run);
  if (run->rec_id) {
    if (const auto rec = store_->find_recommendation(*run->rec_id)) j["recommendation"] = store::to_json(*rec);
  }
  return j;
}

Json App::recommendations(std::size_t limit, std::optional<UtcMs> before) const {
  Json list = Json::array();
  for (const auto& r : store_->list_recommendations(limit, before)) list.push_back(store::to_json(r));
  return Json{{"recommendations", list}};
}

metering::ComparisonReport App::compare() const {
  std::vector<metering::MeterReport> reports;
  for (const auto& r : store_->list_recommendations(std::numeric_limits<std::size_t>::max())) {
    if (backends_.contains(r.meter.backend_id)) reports.push_back(r.meter);
  }
  return metering::compare_report(reports, config_.backends, config_.pipeline.energy);
}

Json App::schedule_list() const {
  Json list = Json::array();
  const UtcMs now = clock_.now_ms();
  for (const auto& rule : scheduler_->rules()) {
    Json j = orchestrator::to_json(rule);
    j["next_fire"] = rule.enabled ? Json(orchestrator::next_fire(rule, now)) : Json();
    const auto c = scheduler_->cursor(rule.rule_id);
    j["cursor"] = c ? Json(*c) : Json();
    list.push_back(j);
  }
  return Json{{"now", now}, {"rules", list}};
}

std::vector<orchestrator::FireRecord> App::tick() { return scheduler_->tick(clock_.now_ms()); }

void App::on_fire(const orchestrator::TriggerRule& rule, UtcMs fire_time, UtcMs now) {
  (void)now;
  if (rule.kind == orchestrator::TriggerKind::kEsmDelivery) {
    esm_->deliver(rule.rule_id, fire_time);
    return;
  }
  orchestrator::RunRequest req;
  req.trigger = rule.rule_id;
  req.window_hours = rule.window_hours;
  const auto result = pipeline_->run(req, backend(config_.default_backend), fire_time);
  if (!result.ok) throw Error("run " + result.run_id + " failed: " + result.error);
}

}  // namespace pocketpilot::gateway
