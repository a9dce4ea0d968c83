#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "pocketpilot/common/clock.hpp"
#include "pocketpilot/common/json.hpp"
#include "pocketpilot/gateway/config.hpp"
#include "pocketpilot/inference/backend.hpp"
#include "pocketpilot/inference/transport.hpp"
#include "pocketpilot/metering/meter.hpp"
#include "pocketpilot/orchestrator/esm_queue.hpp"
#include "pocketpilot/orchestrator/pipeline.hpp"
#include "pocketpilot/orchestrator/scheduler.hpp"
#include "pocketpilot/store/event_store.hpp"

namespace pocketpilot::gateway {

enum class ApiCode { kBadRequest, kNotFound, kConflict, kBackendFailure, kStorageFailure };

std::string_view to_string(ApiCode code);
int http_status(ApiCode code);

class ApiError : public Error {
 public:
  ApiError(ApiCode code, const std::string& message) : Error(message), code_(code) {}
  ApiCode code() const { return code_; }
  Json to_json() const;

 private:
  ApiCode code_;
};

// Maps the exception currently being handled to an ApiError.
ApiError current_api_error();

// Parses a millisecond count or an RFC 3339 timestamp.
UtcMs parse_time_arg(std::string_view text);

// The operations behind both the CLI and the HTTP service. Each method
// delegates to module operations and returns the documented JSON shape;
// failures surface as ApiError.
class App {
 public:
  App(AppConfig config, Clock& clock, std::shared_ptr<inference::HttpTransport> transport = nullptr);

  const AppConfig& config() const { return config_; }
  store::EventStore& store() { return *store_; }
  orchestrator::Pipeline& pipeline() { return *pipeline_; }
  orchestrator::EsmQueue& esm_queue() { return *esm_; }
  orchestrator::Scheduler& scheduler() { return *scheduler_; }
  inference::Backend& backend(const std::string& id);

  Json health() const;
  Json ingest(std::string_view kind, std::string_view data);
  Json events(std::string_view kind, UtcMs from, UtcMs to) const;
  Json digest(UtcMs from, UtcMs to, std::optional<int> budget) const;
  Json esm_pending() const;
  Json esm_answer(const Json& body);
  Json prompt_preview(const Json& body) const;
  Json run(const Json& body);
  Json get_run(const std::string& run_id) const;
  Json recommendations(std::size_t limit, std::optional<UtcMs> before) const;
  metering::ComparisonReport compare() const;
  Json schedule_list() const;

  // Drives the scheduler to the current clock time.
  std::vector<orchestrator::FireRecord> tick();

 private:
  void on_fire(const orchestrator::TriggerRule& rule, UtcMs fire_time, UtcMs now);

  AppConfig config_;
  Clock& clock_;
  std::unique_ptr<store::EventStore> store_;
  std::unique_ptr<metering::ResourceProbe> probe_;
  std::unique_ptr<orchestrator::Pipeline> pipeline_;
  std::unique_ptr<orchestrator::EsmQueue> esm_;
  std::unique_ptr<orchestrator::Scheduler> scheduler_;
  std::map<std::string, std::unique_ptr<inference::Backend>> backends_;
};

}  // namespace pocketpilot::gateway
