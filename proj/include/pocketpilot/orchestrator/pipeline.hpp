#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pocketpilot/common/clock.hpp"
#include "pocketpilot/common/json.hpp"
#include "pocketpilot/digest/sensing_digest.hpp"
#include "pocketpilot/inference/backend.hpp"
#include "pocketpilot/metering/meter.hpp"
#include "pocketpilot/prompt/assembler.hpp"
#include "pocketpilot/sensing/events.hpp"
#include "pocketpilot/store/event_store.hpp"

namespace pocketpilot::orchestrator {

// The fixed parts of the prompt; sensing and user context are filled in per
// run.
struct PromptTemplate {
  std::string instruction;
  std::string c_domain;
  std::string question;
  std::string output_format;
};

struct PipelineSettings {
  PromptTemplate prompt;
  sensing::UserProfile user;
  int digest_budget = 256;
  bool llm_digest = false;  // map-reduce through the run's backend
  inference::GenerationParams params;
  metering::EnergyModel energy;
  int default_window_hours = 24;
};

enum class Stage { kQuery, kDigest, kAssemble, kGenerate, kMeter, kStore };

std::string_view to_string(Stage s);

struct StageStatus {
  Stage stage;
  bool ok = true;
  std::string error;
};

struct PipelineRun {
  std::string run_id;
  std::string trigger;  // rule id or "manual"
  std::string backend_id;
  UtcMs started_at = 0;
  UtcMs finished_at = 0;
  UtcMs window_from = 0;
  UtcMs window_to = 0;
  bool ok = false;
  std::optional<Stage> failed_stage;
  std::string error;
  std::vector<StageStatus> stages;
  std::optional<std::string> rec_id;
};

Json to_json(const PipelineRun& run);
PipelineRun pipeline_run_from_json(const Json& j);

struct RunRequest {
  std::string trigger = "manual";
  std::optional<int> window_hours;
  std::optional<std::string> question;
};

// Draft overrides for previews; unset fields come from the template.
struct PromptDraft {
  std::optional<std::string> instruction;
  std::optional<std::string> c_user;
  std::optional<std::string> c_domain;
  std::optional<std::string> question;
  std::optional<std::string> output_format;
};

struct PreparedPrompt {
  digest::SensingDigest digest;
  prompt::AssembledPrompt prompt;
};

// Runs query -> digest -> assemble -> generate -> meter -> store. A run
// either stores a recommendation and ends ok, or fails at one stage and
// stores nothing. Runs on the same backend are serialized.
class Pipeline {
 public:
  static constexpr const char* kRunsLog = "runs.log";

  Pipeline(store::EventStore& store, Clock& clock, PipelineSettings settings,
           metering::ResourceProbe* probe = nullptr);

  const PipelineSettings& settings() const { return settings_; }

  // Query, digest and assemble only; used by previews and by run().
  PreparedPrompt prepare(UtcMs t0, UtcMs t1, const PromptDraft& draft, const prompt::TokenBudget& budget,
                         inference::Backend* digest_backend = nullptr) const;

  PipelineRun run(const RunRequest& request, inference::Backend& backend, UtcMs now);

  std::optional<PipelineRun> find_run(const std::string& run_id) const;
  std::vector<PipelineRun> list_runs() const;

 private:
  std::string allocate_run_id(const std::string& trigger, UtcMs now);
  std::mutex& backend_lock(const std::string& backend_id);

  store::EventStore& store_;
  Clock& clock_;
  PipelineSettings settings_;
  metering::ResourceProbe* probe_;
  store::JsonlLog runs_log_;

  std::mutex mu_;
  std::set<std::string> run_ids_;
  std::map<std::string, std::unique_ptr<std::mutex>> backend_locks_;
};

}  // namespace pocketpilot::orchestrator
