#include "pocketpilot/gateway/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <thread>

#include "pocketpilot/digest/sensing_digest.hpp"
#include "pocketpilot/gateway/app.hpp"
#include "pocketpilot/gateway/config.hpp"
#include "pocketpilot/gateway/http_server.hpp"

namespace pocketpilot::gateway {

namespace {

std::atomic<bool> g_shutdown{false};

extern "C" void on_signal(int) { g_shutdown.store(true); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ApiError(ApiCode::kNotFound, "cannot read '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::optional<std::filesystem::path> config_path(const std::string& flag,
                                                 const std::vector<std::pair<std::string, std::string>>& env) {
  if (!flag.empty()) return flag;
  for (const auto& [k, v] : env) {
    if (k == "POCKETPILOT_CONFIG" && !v.empty()) return v;
  }
  if (std::filesystem::exists("pocketpilot.toml")) return std::filesystem::path("pocketpilot.toml");
  return std::nullopt;
}

void print_run(std::ostream& out, const Json& j) {
  out << "run " << j.at("run_id").get<std::string>() << " on " << j.at("backend_id").get<std::string>() << ": "
      << j.at("status").get<std::string>() << '\n';
  for (const auto& s : j.at("stages")) {
    out << "  " << s.at("stage").get<std::string>() << ' ' << s.at("status").get<std::string>();
    if (s.contains("error")) out << ": " << s.at("error").get<std::string>();
    out << '\n';
  }
  if (j.contains("recommendation")) {
    const auto& r = j.at("recommendation");
    const auto& m = r.at("meter");
    out << "recommendation " << r.at("rec_id").get<std::string>() << ":\n"
        << r.at("response_text").get<std::string>() << '\n'
        << "tokens " << m.at("prompt_tokens").get<int>() << "+" << m.at("completion_tokens").get<int>()
        << ", latency_ms " << m.at("latency_ms").get<double>() << ", cost_usd "
        << m.at("cost_usd").get<std::string>() << ", energy_j " << m.at("energy_joules").get<std::string>() << '\n';
  }
}

}  // namespace

void request_shutdown() { g_shutdown.store(true); }

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const CliEnvironment& environment) {
  CLI::App cli{"Private on-device wellbeing assistant", "pocketpilot"};
  cli.require_subcommand(1);
  std::string config_flag;
  std::string store_flag;
  bool json = false;
  cli.add_option("--config", config_flag, "Config file (default: $POCKETPILOT_CONFIG or ./pocketpilot.toml)");
  cli.add_option("--store", store_flag, "Store directory, overriding the config");
  cli.add_flag("--json", json, "Machine-readable JSON output");

  std::string kind;
  std::string file;
  auto* ingest = cli.add_subcommand("ingest", "Import an export file (screentext or esm)");
  ingest->add_option("kind", kind)->required()->check(CLI::IsMember({"screentext", "esm"}));
  ingest->add_option("file", file)->required();

  std::string from;
  std::string to;
  std::optional<int> budget;
  auto* digest = cli.add_subcommand("digest", "Summarize a time window");
  digest->add_option("--from", from, "Window start (ms or RFC 3339)")->required();
  digest->add_option("--to", to, "Window end, exclusive")->required();
  digest->add_option("--budget", budget, "Digest token budget");

  auto* prompt = cli.add_subcommand("prompt", "Prompt tools");
  prompt->require_subcommand(1);
  auto* preview = prompt->add_subcommand("preview", "Assemble the prompt without running it");
  std::optional<std::string> question;
  std::optional<int> window_hours;
  std::string backend_id;
  preview->add_option("--question", question, "Question to ask")->required();
  preview->add_option("--budget", budget, "Prompt token budget");
  preview->add_option("--from", from, "Window start");
  preview->add_option("--to", to, "Window end");
  preview->add_option("--backend", backend_id, "Backend whose context size applies");

  auto* run = cli.add_subcommand("run", "Run the pipeline once");
  run->add_option("--backend", backend_id, "Backend id");
  run->add_option("--question", question, "Override the template question");
  run->add_option("--window-hours", window_hours, "Sensing window length");

  auto* esm = cli.add_subcommand("esm", "Questionnaires");
  esm->require_subcommand(1);
  auto* esm_list = esm->add_subcommand("list", "Pending questionnaires");
  auto* esm_answer = esm->add_subcommand("answer", "Answer one factor");
  std::string factor;
  std::string answer_text;
  std::optional<int> scale;
  std::optional<std::string> slot;
  std::optional<std::string> at;
  esm_answer->add_option("factor", factor)->required();
  esm_answer->add_option("text", answer_text)->required();
  esm_answer->add_option("--scale", scale, "Likert value 1-5");
  esm_answer->add_option("--slot", slot, "morning or night");
  esm_answer->add_option("--at", at, "Answer timestamp");

  auto* report = cli.add_subcommand("report", "Metering reports");
  report->require_subcommand(1);
  auto* compare = report->add_subcommand("compare", "Compare backends over stored runs");

  auto* serve = cli.add_subcommand("serve", "Start the local service");
  std::optional<int> port;
  std::string host = "127.0.0.1";
  bool allow_remote = false;
  std::string static_dir;
  serve->add_option("--port", port, "Port (0 picks a free one)");
  serve->add_option("--host", host, "Bind address");
  serve->add_flag("--allow-remote", allow_remote, "Permit a non-loopback bind address");
  serve->add_option("--static", static_dir, "Directory served at /");

  auto* schedule = cli.add_subcommand("schedule", "Trigger rules");
  schedule->require_subcommand(1);
  auto* schedule_list = schedule->add_subcommand("list", "Rules with their next fire time");
  auto* schedule_tick = schedule->add_subcommand("tick", "Handle every fire due now");

  std::optional<std::size_t> limit;
  auto* recs = cli.add_subcommand("recommendations", "Stored recommendations, newest first");
  recs->add_option("--limit", limit, "Maximum count");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    cli.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << cli.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << cli.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << cli.help("", CLI::AppFormatMode::Normal);
    return kExitUsage;
  }

  Clock& clock = environment.clock != nullptr ? *environment.clock : system_clock();
  try {
    AppConfig cfg = load_config(config_path(config_flag, environment.env), environment.env);
    if (!store_flag.empty()) cfg.store_path = store_flag;
    if (port) cfg.port = *port;
    App app(std::move(cfg), clock, environment.transport);

    auto emit = [&](const Json& j, const std::string& text) {
      if (json) {
        out << j.dump(2) << '\n';
      } else {
        out << text;
        if (!text.empty() && text.back() != '\n') out << '\n';
      }
    };

    if (*ingest) {
      const Json j = app.ingest(kind, read_file(file));
      emit(j, "inserted " + std::to_string(j.at("inserted").get<std::size_t>()) + " of " +
                  std::to_string(j.at("received").get<std::size_t>()) + " " + kind + " events");
    } else if (*digest) {
      const Json j = app.digest(parse_time_arg(from), parse_time_arg(to), budget);
      std::vector<std::string> lines;
      for (const auto& l : j.at("esm_lines")) lines.push_back(l.get<std::string>());
      emit(j, digest::render_digest(j.at("summary_text").get<std::string>(), lines));
    } else if (*preview) {
      Json body{{"question", *question}};
      if (budget) body["budget"] = *budget;
      if (!from.empty()) body["from"] = parse_time_arg(from);
      if (!to.empty()) body["to"] = parse_time_arg(to);
      if (!backend_id.empty()) body["backend"] = backend_id;
      const Json j = app.prompt_preview(body);
      emit(j, j.at("text").get<std::string>());
    } else if (*run) {
      Json body = Json::object();
      if (!backend_id.empty()) body["backend"] = backend_id;
      if (question) body["question"] = *question;
      if (window_hours) body["window_hours"] = *window_hours;
      const Json j = app.run(body);
      if (json) {
        out << j.dump(2) << '\n';
      } else {
        print_run(out, j);
      }
      return j.at("status") == "ok" ? kExitOk : kExitApiError;
    } else if (*esm_list) {
      const Json j = app.esm_pending();
      std::ostringstream text;
      if (j.at("pending").empty()) text << "no pending questionnaires";
      for (const auto& p : j.at("pending")) {
        text << p.at("pending_id").get<std::string>() << " (" << p.at("slot").get<std::string>() << "):";
        for (const auto& f : p.at("remaining")) text << ' ' << f.get<std::string>();
        text << '\n';
      }
      emit(j, text.str());
    } else if (*esm_answer) {
      Json body{{"factor", factor}, {"answer", answer_text}};
      if (scale) body["scale_value"] = *scale;
      if (slot) body["slot"] = *slot;
      if (at) body["timestamp"] = parse_time_arg(*at);
      const Json j = app.esm_answer(body);
      emit(j, "recorded " + j.at("event_id").get<std::string>());
    } else if (*compare) {
      const auto r = app.compare();
      emit(r.to_json(), r.to_text_table());
    } else if (*serve) {
      ServerOptions opts;
      opts.host = host;
      opts.port = app.config().port;
      opts.allow_remote = allow_remote;
      if (!static_dir.empty()) opts.static_dir = static_dir;
      HttpServer server(app, opts);
      server.start();
      err << "serving on http://" << host << ":" << server.port() << '\n';
      g_shutdown.store(false);
      if (environment.install_signal_handlers) {
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
      }
      while (!g_shutdown.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
    } else if (*schedule_list) {
      const Json j = app.schedule_list();
      std::ostringstream text;
      if (j.at("rules").empty()) text << "no rules";
      for (const auto& r : j.at("rules")) {
        text << r.at("rule_id").get<std::string>() << ' ' << r.at("kind").get<std::string>() << ' '
             << r.at("timezone").get<std::string>();
        for (const auto& t : r.at("times_of_day")) text << ' ' << t.get<std::string>();
        text << (r.at("enabled").get<bool>() ? "" : " (disabled)");
        if (!r.at("next_fire").is_null()) text << " next " << r.at("next_fire").get<UtcMs>();
        text << '\n';
      }
      emit(j, text.str());
    } else if (*schedule_tick) {
      Json fired = Json::array();
      std::ostringstream text;
      for (const auto& rec : app.tick()) {
        fired.push_back(orchestrator::to_json(rec));
        text << rec.rule_id << ' ' << rec.fire_time << ' ' << orchestrator::to_string(rec.outcome);
        if (!rec.note.empty()) text << ": " << rec.note;
        text << '\n';
      }
      if (fired.empty()) text << "nothing due";
      emit(Json{{"fired", fired}}, text.str());
    } else if (*recs) {
      const Json j = app.recommendations(limit.value_or(10), std::nullopt);
      std::ostringstream text;
      if (j.at("recommendations").empty()) text << "no recommendations";
      for (const auto& r : j.at("recommendations")) {
        text << r.at("rec_id").get<std::string>() << " [" << r.at("backend_id").get<std::string>() << "] "
             << r.at("response_text").get<std::string>() << '\n';
      }
      emit(j, text.str());
    }
    return kExitOk;
  } catch (...) {
    const ApiError e = current_api_error();
    if (json) {
      out << e.to_json().dump(2) << '\n';
    } else {
      err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    }
    return kExitApiError;
  }
}

}  // namespace pocketpilot::gateway
