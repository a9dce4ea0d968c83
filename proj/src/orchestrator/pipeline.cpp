#include "pocketpilot/orchestrator/pipeline.hpp"

#include "pocketpilot/common/hash.hpp"
#include "pocketpilot/digest/digester.hpp"

namespace pocketpilot::orchestrator {

namespace {

constexpr std::array<std::string_view, 6> kStageNames = {"query", "digest", "assemble", "generate", "meter", "store"};

std::optional<Stage> parse_stage(std::string_view text) {
  for (std::size_t i = 0; i < kStageNames.size(); ++i) {
    if (kStageNames[i] == text) return static_cast<Stage>(i);
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Stage s) { return kStageNames[static_cast<std::size_t>(s)]; }

Json to_json(const PipelineRun& run) {
  Json stages = Json::array();
  for (const auto& s : run.stages) {
    Json j{{"stage", to_string(s.stage)}, {"status", s.ok ? "ok" : "failed"}};
    if (!s.error.empty()) j["error"] = s.error;
    stages.push_back(j);
  }
  Json status = run.ok ? Json("ok") : Json("failed");
  Json j{{"run_id", run.run_id},
         {"trigger", run.trigger},
         {"backend_id", run.backend_id},
         {"started_at", run.started_at},
         {"finished_at", run.finished_at},
         {"window", Json{{"from", run.window_from}, {"to", run.window_to}}},
         {"status", status},
         {"stages", stages},
         {"rec_id", run.rec_id ? Json(*run.rec_id) : Json()}};
  if (!run.ok) {
    j["failure"] = Json{{"stage", run.failed_stage ? Json(to_string(*run.failed_stage)) : Json()},
                        {"error", run.error}};
  }
  return j;
}

PipelineRun pipeline_run_from_json(const Json& j) {
  PipelineRun run;
  run.run_id = j.at("run_id").get<std::string>();
  run.trigger = j.at("trigger").get<std::string>();
  run.backend_id = j.at("backend_id").get<std::string>();
  run.started_at = j.at("started_at").get<UtcMs>();
  run.finished_at = j.at("finished_at").get<UtcMs>();
  run.window_from = j.at("window").at("from").get<UtcMs>();
  run.window_to = j.at("window").at("to").get<UtcMs>();
  run.ok = j.at("status").get<std::string>() == "ok";
  for (const auto& s : j.at("stages")) {
    StageStatus st{parse_stage(s.at("stage").get<std::string>()).value_or(Stage::kQuery),
                   s.at("status").get<std::string>() == "ok", s.value("error", std::string())};
    run.stages.push_back(st);
  }
  if (const auto it = j.find("rec_id"); it != j.end() && it->is_string()) run.rec_id = it->get<std::string>();
  if (const auto it = j.find("failure"); it != j.end()) {
    if (it->at("stage").is_string()) run.failed_stage = parse_stage(it->at("stage").get<std::string>());
    run.error = it->value("error", std::string());
  }
  return run;
}

Pipeline::Pipeline(store::EventStore& store, Clock& clock, PipelineSettings settings,
                   metering::ResourceProbe* probe)
    : store_(store),
      clock_(clock),
      settings_(std::move(settings)),
      probe_(probe),
      runs_log_(store.dir() / kRunsLog) {
  for (const auto& j : runs_log_.read_all()) {
    run_ids_.insert(j.at("run_id").get<std::string>());
  }
}

PreparedPrompt Pipeline::prepare(UtcMs t0, UtcMs t1, const PromptDraft& draft, const prompt::TokenBudget& budget,
                                 inference::Backend* digest_backend) const {
  const auto screen = store_.query_screentext(t0, t1);
  const auto esm = store_.query_esm(t0, t1);

  digest::DigestOptions opts;
  opts.t0 = t0;
  opts.t1 = t1;
  opts.budget = settings_.digest_budget;
  opts.backend = digest_backend;
  opts.params = settings_.params;
  PreparedPrompt out;
  out.digest = digest::digest_window(screen, esm, opts);

  prompt::PromptSpec spec;
  spec.instruction = draft.instruction.value_or(settings_.prompt.instruction);
  spec.c_user = draft.c_user.value_or(prompt::render_user_profile(settings_.user));
  spec.c_domain = draft.c_domain.value_or(settings_.prompt.c_domain);
  spec.c_sensing = out.digest;
  spec.question = draft.question.value_or(settings_.prompt.question);
  spec.output_format = draft.output_format.value_or(settings_.prompt.output_format);
  out.prompt = prompt::assemble(spec, budget);
  return out;
}

std::string Pipeline::allocate_run_id(const std::string& trigger, UtcMs now) {
  std::lock_guard lock(mu_);
  const std::string base = "run-" + trigger + "-" + std::to_string(now);
  std::string id = base;
  for (int n = 2; run_ids_.contains(id); ++n) id = base + "-" + std::to_string(n);
  run_ids_.insert(id);
  return id;
}

std::mutex& Pipeline::backend_lock(const std::string& backend_id) {
  std::lock_guard lock(mu_);
  auto& slot = backend_locks_[backend_id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

PipelineRun Pipeline::run(const RunRequest& request, inference::Backend& backend, UtcMs now) {
  std::lock_guard serial(backend_lock(backend.id()));

  PipelineRun run;
  run.run_id = allocate_run_id(request.trigger, now);
  run.trigger = request.trigger;
  run.backend_id = backend.id();
  run.started_at = now;
  const int window_hours = request.window_hours.value_or(settings_.default_window_hours);
  run.window_from = now - static_cast<UtcMs>(window_hours) * kMsPerHour;
  run.window_to = now;

  Stage current = Stage::kQuery;
  auto pass = [&](Stage s) { run.stages.push_back(StageStatus{s, true, {}}); };

  try {
    if (window_hours < 1) throw std::invalid_argument("window_hours must be >= 1");
    const auto screen = store_.query_screentext(run.window_from, run.window_to);
    const auto esm = store_.query_esm(run.window_from, run.window_to);
    pass(Stage::kQuery);

    current = Stage::kDigest;
    digest::DigestOptions opts;
    opts.t0 = run.window_from;
    opts.t1 = run.window_to;
    opts.budget = settings_.digest_budget;
    opts.backend = settings_.llm_digest ? &backend : nullptr;
    opts.params = settings_.params;
    const digest::SensingDigest sensing_digest = digest::digest_window(screen, esm, opts);
    pass(Stage::kDigest);

    current = Stage::kAssemble;
    prompt::PromptSpec spec;
    spec.instruction = settings_.prompt.instruction;
    spec.c_user = prompt::render_user_profile(settings_.user);
    spec.c_domain = settings_.prompt.c_domain;
    spec.c_sensing = sensing_digest;
    spec.question = request.question.value_or(settings_.prompt.question);
    spec.output_format = settings_.prompt.output_format;
    const auto budget = prompt::TokenBudget::make(backend.config().context_tokens, settings_.params.max_tokens);
    const prompt::AssembledPrompt assembled = prompt::assemble(spec, budget);
    pass(Stage::kAssemble);

    current = Stage::kGenerate;
    const inference::InferenceResult result = backend.generate(assembled, settings_.params);
    pass(Stage::kGenerate);

    current = Stage::kMeter;
    const metering::MeterReport meter = metering::meter_run(result, backend.config(), settings_.energy, probe_);
    pass(Stage::kMeter);

    current = Stage::kStore;
    store::StoredRecommendation rec;
    rec.rec_id = "rec-" + run.run_id.substr(4);
    rec.created_at = clock_.now_ms();
    rec.prompt_digest = sha256_hex(assembled.text);
    rec.response_text = result.text;
    rec.backend_id = backend.id();
    rec.meter = meter;
    run.rec_id = store_.append_recommendation(rec);
    pass(Stage::kStore);
    run.ok = true;
  } catch (const std::exception& e) {
    run.ok = false;
    run.rec_id.reset();
    run.failed_stage = current;
    run.error = e.what();
    run.stages.push_back(StageStatus{current, false, e.what()});
  }

  run.finished_at = std::max(clock_.now_ms(), run.started_at);
  runs_log_.append(to_json(run));
  return run;
}

std::optional<PipelineRun> Pipeline::find_run(const std::string& run_id) const {
  for (const auto& j : runs_log_.read_all()) {
    if (j.value("run_id", "") == run_id) return pipeline_run_from_json(j);
  }
  return std::nullopt;
}

std::vector<PipelineRun> Pipeline::list_runs() const {
  std::vector<PipelineRun> out;
  for (const auto& j : runs_log_.read_all()) out.push_back(pipeline_run_from_json(j));
  return out;
}

}  // namespace pocketpilot::orchestrator
