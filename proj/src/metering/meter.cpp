#include "pocketpilot/metering/meter.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace pocketpilot::metering {

Decimal estimate_energy(Decimal param_count_billion, std::int64_t tokens, const EnergyModel& model) {
  if (param_count_billion < Decimal(0) || tokens < 0) {
    throw std::invalid_argument("energy inputs must be non-negative");
  }
  return model.joules_per_token_per_billion * (param_count_billion * tokens);
}

Decimal estimate_cost(std::int64_t total_tokens, Decimal price_usd_per_mtok) {
  if (total_tokens < 0 || price_usd_per_mtok < Decimal(0)) {
    throw std::invalid_argument("cost inputs must be non-negative");
  }
  return price_usd_per_mtok * total_tokens / 1'000'000;
}

ReplayProbe::ReplayProbe(std::vector<ResourceSample> samples) : samples_(std::move(samples)) {}

ResourceSample ReplayProbe::sample() {
  if (next_ >= samples_.size()) {
    throw ProbeUnavailable("replay probe exhausted");
  }
  return samples_[next_++];
}

namespace {

std::optional<double> read_battery_capacity() {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path root = "/sys/class/power_supply";
  if (!fs::is_directory(root, ec)) {
    return std::nullopt;
  }
  for (const auto& entry : fs::directory_iterator(root, ec)) {
    std::ifstream type(entry.path() / "type");
    std::string kind;
    if (!(type >> kind) || kind != "Battery") continue;
    std::ifstream cap(entry.path() / "capacity");
    double value = 0;
    if (cap >> value) return value;
  }
  return std::nullopt;
}

std::optional<double> read_ram_pct() {
  std::ifstream meminfo("/proc/meminfo");
  std::string key;
  double value = 0;
  std::string unit;
  std::optional<double> total;
  std::optional<double> available;
  while (meminfo >> key >> value >> unit) {
    if (key == "MemTotal:") total = value;
    if (key == "MemAvailable:") available = value;
  }
  if (!total || !available || *total <= 0) return std::nullopt;
  return (*total - *available) / *total * 100.0;
}

std::mutex& probe_mutex() {
  static std::mutex mu;
  return mu;
}

}  // namespace

SystemProbe::SystemProbe(Clock& clock)
    : clock_(clock), start_capacity_(read_battery_capacity()), start_time_(clock.now_ms()) {}

ResourceSample SystemProbe::sample() {
  const auto ram = read_ram_pct();
  const auto capacity = read_battery_capacity();
  if (!ram || !capacity || !start_capacity_) {
    throw ProbeUnavailable("no RAM or battery reading on this platform");
  }
  ResourceSample s;
  s.ram_pct = *ram;
  s.battery_drop_pct = std::max(0.0, *start_capacity_ - *capacity);
  s.interval_min = static_cast<double>(clock_.now_ms() - start_time_) / 60000.0;
  return s;
}

std::optional<ResourceSample> sample_resources(ResourceProbe* probe) {
  if (probe == nullptr) {
    return std::nullopt;
  }
  std::lock_guard lock(probe_mutex());
  try {
    return probe->sample();
  } catch (const ProbeUnavailable&) {
    return std::nullopt;
  }
}

MeterReport meter_run(const inference::InferenceResult& result, const inference::BackendConfig& config,
                      const EnergyModel& model, ResourceProbe* probe) {
  MeterReport r;
  r.backend_id = result.backend_id;
  r.latency_ms = result.latency_ms;
  r.prompt_tokens = result.prompt_tokens;
  r.completion_tokens = result.completion_tokens;
  r.cost_usd = estimate_cost(r.total_tokens(), config.price_usd_per_mtok);
  r.energy_joules = estimate_energy(config.param_count_billion, r.total_tokens(), model);
  r.resource_sample = sample_resources(probe);
  return r;
}

Json to_json(const MeterReport& r) {
  Json j{{"backend_id", r.backend_id},
         {"latency_ms", r.latency_ms},
         {"prompt_tokens", r.prompt_tokens},
         {"completion_tokens", r.completion_tokens},
         {"cost_usd", r.cost_usd.to_string()},
         {"energy_joules", r.energy_joules.to_string()},
         {"energy_modeled", true}};
  if (r.resource_sample) {
    j["resource_sample"] = Json{{"ram_pct", r.resource_sample->ram_pct},
                                {"battery_drop_pct", r.resource_sample->battery_drop_pct},
                                {"interval_min", r.resource_sample->interval_min}};
  }
  return j;
}

MeterReport meter_report_from_json(const Json& j) {
  MeterReport r;
  r.backend_id = j.at("backend_id").get<std::string>();
  r.latency_ms = j.at("latency_ms").get<double>();
  r.prompt_tokens = j.at("prompt_tokens").get<int>();
  r.completion_tokens = j.at("completion_tokens").get<int>();
  r.cost_usd = Decimal::parse(j.at("cost_usd").get<std::string>());
  r.energy_joules = Decimal::parse(j.at("energy_joules").get<std::string>());
  if (const auto it = j.find("resource_sample"); it != j.end() && it->is_object()) {
    r.resource_sample = ResourceSample{it->at("ram_pct").get<double>(), it->at("battery_drop_pct").get<double>(),
                                       it->at("interval_min").get<double>()};
  }
  return r;
}

ComparisonReport compare_report(const std::vector<MeterReport>& runs,
                                const std::vector<inference::BackendConfig>& configs, const EnergyModel& model) {
  if (runs.empty()) {
    throw EmptyInput("comparison needs at least one run");
  }
  std::map<std::string, std::vector<const MeterReport*>> by_backend;
  for (const auto& r : runs) {
    const bool known = std::any_of(configs.begin(), configs.end(),
                                   [&](const auto& c) { return c.backend_id == r.backend_id; });
    if (!known) {
      throw std::invalid_argument("run references unknown backend '" + r.backend_id + "'");
    }
    by_backend[r.backend_id].push_back(&r);
  }

  ComparisonReport report;
  report.energy_model = model;
  for (const auto& cfg : configs) {
    const auto it = by_backend.find(cfg.backend_id);
    if (it == by_backend.end()) continue;
    const auto& group = it->second;

    BackendSummary s;
    s.backend_id = cfg.backend_id;
    s.kind = cfg.kind;
    s.local = cfg.is_local();
    s.runs = group.size();
    s.param_count_billion = cfg.param_count_billion;
    s.price_usd_per_mtok = cfg.price_usd_per_mtok;

    std::vector<double> latencies;
    Decimal cost_sum;
    Decimal energy_sum;
    for (const MeterReport* r : group) {
      latencies.push_back(r->latency_ms);
      cost_sum += r->cost_usd;
      energy_sum += r->energy_joules;
    }
    std::sort(latencies.begin(), latencies.end());
    const std::size_t n = latencies.size();
    s.median_latency_ms = n % 2 == 1 ? latencies[n / 2] : (latencies[n / 2 - 1] + latencies[n / 2]) / 2.0;
    s.mean_cost_usd = cost_sum / static_cast<std::int64_t>(n);
    s.mean_energy_joules = energy_sum / static_cast<std::int64_t>(n);
    report.backends.push_back(std::move(s));
  }

  std::optional<Decimal> min_energy;
  for (const auto& s : report.backends) {
    if (s.mean_energy_joules > Decimal(0) && (!min_energy || s.mean_energy_joules < *min_energy)) {
      min_energy = s.mean_energy_joules;
    }
  }
  if (min_energy) {
    for (auto& s : report.backends) {
      s.energy_ratio = s.mean_energy_joules / *min_energy;
    }
  }
  return report;
}

namespace {

std::string latency_text(double ms) { return fmt::format("{:.1f}", ms); }

}  // namespace

Json ComparisonReport::to_json() const {
  Json backends_json = Json::array();
  Json privacy = Json::object();
  Json cost = Json::object();
  Json latency = Json::object();
  Json energy = Json::object();
  for (const auto& s : backends) {
    backends_json.push_back(Json{
        {"backend_id", s.backend_id},
        {"kind", inference::to_string(s.kind)},
        {"locality", s.local ? "local" : "remote"},
        {"network_egress", !s.local},
        {"runs", s.runs},
        {"param_count_billion", s.param_count_billion.to_string()},
        {"price_usd_per_mtok", s.price_usd_per_mtok.to_string()},
        {"median_latency_ms", s.median_latency_ms},
        {"mean_cost_usd", s.mean_cost_usd.to_string()},
        {"mean_energy_joules", s.mean_energy_joules.to_string()},
        {"energy_ratio", s.energy_ratio ? Json(s.energy_ratio->to_string()) : Json()},
    });
    privacy[s.backend_id] = s.local ? "local" : "remote";
    cost[s.backend_id] = s.mean_cost_usd.to_string();
    latency[s.backend_id] = s.median_latency_ms;
    energy[s.backend_id] = s.mean_energy_joules.to_string();
  }
  return Json{
      {"energy_model",
       Json{{"joules_per_token_per_billion", energy_model.joules_per_token_per_billion.to_string()},
            {"label", "modeled"}}},
      {"backends", backends_json},
      {"dimensions", Json::array({Json{{"dimension", "privacy"}, {"values", privacy}},
                                  Json{{"dimension", "cost"}, {"values", cost}},
                                  Json{{"dimension", "latency"}, {"values", latency}},
                                  Json{{"dimension", "energy"}, {"values", energy}}})},
  };
}

std::string ComparisonReport::to_text_table() const {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"dimension"};
  for (const auto& s : backends) header.push_back(s.backend_id);
  rows.push_back(header);

  auto add_row = [&](std::string name, auto cell) {
    std::vector<std::string> row{std::move(name)};
    for (const auto& s : backends) row.push_back(cell(s));
    rows.push_back(std::move(row));
  };
  add_row("kind", [](const BackendSummary& s) { return std::string(inference::to_string(s.kind)); });
  add_row("privacy", [](const BackendSummary& s) { return std::string(s.local ? "local" : "remote"); });
  add_row("network_egress", [](const BackendSummary& s) { return std::string(s.local ? "no" : "yes"); });
  add_row("runs", [](const BackendSummary& s) { return std::to_string(s.runs); });
  add_row("params_billion", [](const BackendSummary& s) { return s.param_count_billion.to_string(); });
  add_row("price_usd_per_mtok", [](const BackendSummary& s) { return s.price_usd_per_mtok.to_string(); });
  add_row("median_latency_ms", [](const BackendSummary& s) { return latency_text(s.median_latency_ms); });
  add_row("mean_cost_usd", [](const BackendSummary& s) { return s.mean_cost_usd.to_string(); });
  add_row("mean_energy_j", [](const BackendSummary& s) { return s.mean_energy_joules.to_string(); });
  add_row("energy_ratio", [](const BackendSummary& s) {
    return s.energy_ratio ? s.energy_ratio->to_string() : std::string("-");
  });

  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  std::string out = fmt::format("# energy is modeled at {} J per token per billion parameters\n",
                                energy_model.joules_per_token_per_billion.to_string());
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c + 1 == row.size()) {
        line += row[c];
      } else {
        line += fmt::format("{:<{}}  ", row[c], widths[c]);
      }
    }
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace pocketpilot::metering
