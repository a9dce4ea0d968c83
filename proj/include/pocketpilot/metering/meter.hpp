#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pocketpilot/common/decimal.hpp"
#include "pocketpilot/common/error.hpp"
#include "pocketpilot/common/json.hpp"
#include "pocketpilot/inference/backend.hpp"

namespace pocketpilot::metering {

// Modeled (not measured) inference energy: joules per token per billion
// parameters.
struct EnergyModel {
  Decimal joules_per_token_per_billion = Decimal::parse("0.1");
};

Decimal estimate_energy(Decimal param_count_billion, std::int64_t tokens, const EnergyModel& model = {});
Decimal estimate_cost(std::int64_t total_tokens, Decimal price_usd_per_mtok);

struct ResourceSample {
  double ram_pct = 0.0;
  double battery_drop_pct = 0.0;
  double interval_min = 0.0;

  friend bool operator==(const ResourceSample&, const ResourceSample&) = default;
};

class ProbeUnavailable : public Error {
 public:
  using Error::Error;
};

class ResourceProbe {
 public:
  virtual ~ResourceProbe() = default;
  // Throws ProbeUnavailable when no reading can be taken.
  virtual ResourceSample sample() = 0;
};

// Replays configured samples in order, then reports unavailable.
class ReplayProbe final : public ResourceProbe {
 public:
  explicit ReplayProbe(std::vector<ResourceSample> samples);
  ResourceSample sample() override;

 private:
  std::vector<ResourceSample> samples_;
  std::size_t next_ = 0;
};

// Linux: RAM from /proc/meminfo, battery drop since construction from
// /sys/class/power_supply. Unavailable on machines without a battery.
class SystemProbe final : public ResourceProbe {
 public:
  explicit SystemProbe(Clock& clock);
  ResourceSample sample() override;

 private:
  Clock& clock_;
  std::optional<double> start_capacity_;
  UtcMs start_time_;
};

// Serializes probe calls; returns nullopt when the probe is missing or
// unavailable.
std::optional<ResourceSample> sample_resources(ResourceProbe* probe);

struct MeterReport {
  std::string backend_id;
  double latency_ms = 0.0;
  int prompt_tokens = 0;
  int completion_tokens = 0;
  Decimal cost_usd;
  Decimal energy_joules;
  std::optional<ResourceSample> resource_sample;

  std::int64_t total_tokens() const { return static_cast<std::int64_t>(prompt_tokens) + completion_tokens; }
};

MeterReport meter_run(const inference::InferenceResult& result, const inference::BackendConfig& config,
                      const EnergyModel& model = {}, ResourceProbe* probe = nullptr);

Json to_json(const MeterReport& r);
MeterReport meter_report_from_json(const Json& j);

class EmptyInput : public Error {
 public:
  using Error::Error;
};

struct BackendSummary {
  std::string backend_id;
  inference::BackendKind kind = inference::BackendKind::kMock;
  bool local = true;
  std::size_t runs = 0;
  double median_latency_ms = 0.0;
  Decimal mean_cost_usd;
  Decimal mean_energy_joules;
  Decimal param_count_billion;
  Decimal price_usd_per_mtok;
  // mean energy relative to the lowest-energy backend in the report
  std::optional<Decimal> energy_ratio;
};

struct ComparisonReport {
  EnergyModel energy_model;
  std::vector<BackendSummary> backends;

  Json to_json() const;
  std::string to_text_table() const;
};

// Per-backend aggregates, in `configs` order, for every config with runs.
// Runs whose backend has no config are rejected with std::invalid_argument.
ComparisonReport compare_report(const std::vector<MeterReport>& runs,
                                const std::vector<inference::BackendConfig>& configs,
                                const EnergyModel& model = {});

}  // namespace pocketpilot::metering
