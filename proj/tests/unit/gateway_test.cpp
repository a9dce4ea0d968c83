#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <doctest.h>
#include <httplib.h>

#include <fstream>
#include <sstream>

#include "pocketpilot/digest/digester.hpp"
#include "pocketpilot/gateway/app.hpp"
#include "pocketpilot/gateway/cli.hpp"
#include "pocketpilot/gateway/config.hpp"
#include "pocketpilot/gateway/http_server.hpp"
#include "pocketpilot/sensing/ingest.hpp"
#include "support/support.hpp"

using namespace pocketpilot;
using namespace pocketpilot::gateway;

namespace {

constexpr UtcMs kDayEnd = 1717423200000;  // 2024-06-04 00:00 Melbourne

AppConfig test_config(const std::filesystem::path& store) {
  AppConfig c = load_config(pptest::fixture("pocketpilot.toml"), {});
  c.store_path = store;
  c.rules_path.reset();
  return c;
}

struct Cli {
  std::filesystem::path dir;
  SimulatedClock clock{kDayEnd};
  std::vector<std::pair<std::string, std::string>> env;

  struct Result {
    int code;
    std::string out;
    std::string err;
  };

  Result operator()(std::vector<std::string> args) {
    std::vector<std::string> full = {"--config", pptest::fixture("pocketpilot.toml").string(), "--store",
                                     (dir / "store").string()};
    full.insert(full.end(), args.begin(), args.end());
    std::ostringstream out;
    std::ostringstream err;
    CliEnvironment e;
    e.clock = &clock;
    e.env = env;
    const int code = run_cli(full, out, err, e);
    return {code, out.str(), err.str()};
  }
};

}  // namespace

TEST_CASE("config document parsing") {
  const auto doc = ConfigDocument::parse(R"(
# comment
name = "x # not a comment"
n = 42
ratio = 0.25
flag = true
single = 'raw\n'
list = ["a", "b"]
multi = [
  1,
  2, # trailing
]
[backend.cloud]
kind = "cloud_api"
[backend.phone]
kind = "mock"
)");
  CHECK(doc.get_string("name") == "x # not a comment");
  CHECK(doc.get_int("n") == 42);
  CHECK(doc.get_double("ratio") == doctest::Approx(0.25));
  CHECK(doc.get_decimal("ratio") == Decimal::parse("0.25"));
  CHECK(doc.get_bool("flag") == true);
  CHECK(doc.get_string("single") == "raw\\n");
  CHECK(doc.get_list("list") == std::vector<std::string>{"a", "b"});
  CHECK(doc.get_list("multi") == std::vector<std::string>{"1", "2"});
  CHECK(doc.children("backend") == std::vector<std::string>{"cloud", "phone"});
  CHECK_FALSE(doc.get_string("missing"));
  CHECK_THROWS_AS(doc.get_int("name"), ConfigError);
  CHECK_THROWS_AS(ConfigDocument::parse("novalue\n"), ConfigError);
  CHECK_THROWS_AS(ConfigDocument::parse("[unclosed\n"), ConfigError);
}

TEST_CASE("configuration file and environment overrides") {
  const auto base = load_config(pptest::fixture("pocketpilot.toml"), {});
  CHECK(base.default_backend == "phone");
  CHECK(base.timezone == "Australia/Melbourne");
  CHECK(base.pipeline.user.display_name == "Alex");
  CHECK(base.backends.size() == 3);
  CHECK(base.store_path.is_absolute());
  CHECK(base.rules_path->filename() == "rules.json");

  const auto over = load_config(pptest::fixture("pocketpilot.toml"),
                                {{"POCKETPILOT_DIGEST__BUDGET", "128"},
                                 {"POCKETPILOT_DEFAULT_BACKEND", "cloud"},
                                 {"POCKETPILOT_BACKEND__CLOUD__API_KEY", "sk-test"},
                                 {"UNRELATED", "1"}});
  CHECK(over.pipeline.digest_budget == 128);
  CHECK(over.default_backend == "cloud");
  const auto cloud = std::find_if(over.backends.begin(), over.backends.end(),
                                  [](const auto& b) { return b.backend_id == "cloud"; });
  REQUIRE(cloud != over.backends.end());
  CHECK(cloud->api_key == "sk-test");

  CHECK_THROWS_AS(load_config(pptest::fixture("pocketpilot.toml"), {{"POCKETPILOT_DEFAULT_BACKEND", "nosuch"}}),
                  ConfigError);
  CHECK_THROWS_AS(load_config(pptest::fixture("pocketpilot.toml"), {{"POCKETPILOT_DIGEST__BUDGET", "4"}}),
                  ConfigError);
  CHECK_THROWS_AS(load_config(pptest::fixture("pocketpilot.toml"), {{"POCKETPILOT_TIMEZONE", "Nowhere/City"}}),
                  ConfigError);
  const auto builtin = load_config(std::nullopt, {});
  CHECK(builtin.default_backend == default_config().default_backend);
}

TEST_CASE("API error mapping and time arguments") {
  auto map = [](auto thrower) {
    try {
      thrower();
    } catch (...) {
      return current_api_error().code();
    }
    return ApiCode::kStorageFailure;
  };
  CHECK(map([] { throw std::invalid_argument("x"); }) == ApiCode::kBadRequest);
  CHECK(map([] { throw ApiError(ApiCode::kConflict, "c"); }) == ApiCode::kConflict);
  CHECK(map([] { (void)Json::parse("{"); }) == ApiCode::kBadRequest);
  CHECK(map([] { throw store::StorageFailure("disk"); }) == ApiCode::kStorageFailure);
  CHECK(map([] { throw inference::TransportFailure("down"); }) == ApiCode::kBackendFailure);
  CHECK(http_status(ApiCode::kNotFound) == 404);
  CHECK(http_status(ApiCode::kBackendFailure) == 502);
  CHECK(ApiError(ApiCode::kBadRequest, "m").to_json() == Json::parse(R"({"error":{"code":"bad_request","message":"m"}})"));

  CHECK(parse_time_arg("1717400000000") == 1717400000000);
  CHECK(parse_time_arg("2024-06-03T00:00:00+10:00") == 1717336800000);
  CHECK(parse_time_arg("2024-06-02T14:00:00Z") == 1717336800000);
  CHECK_THROWS(parse_time_arg("yesterday"));
}

TEST_CASE("App operations delegate to the modules") {
  pptest::TempDir dir("app");
  SimulatedClock clock(kDayEnd);
  App app(test_config(dir.path() / "store"), clock);
  const std::string day = pptest::read_file(pptest::fixture("day.jsonl"));
  CHECK(app.ingest("screentext", day)["inserted"] == 18);
  CHECK(app.ingest("screentext", day)["inserted"] == 0);
  CHECK(app.ingest("esm", pptest::read_file(pptest::fixture("day_esm.jsonl")))["inserted"] == 12);
  CHECK_THROWS_AS(app.ingest("video", "{}"), ApiError);

  const UtcMs t0 = kDayEnd - kMsPerDay;
  const auto events = app.events("screentext", t0, kDayEnd);
  CHECK(events["events"].size() == pptest::frozen()["fixture"]["day_screentext_ids"].size());

  // The gateway output equals the module output for the same inputs.
  const auto digest = app.digest(t0, kDayEnd, 256);
  digest::DigestOptions o;
  o.t0 = t0;
  o.t1 = kDayEnd;
  o.budget = 256;
  const auto direct = digest::digest_window(app.store().query_screentext(t0, kDayEnd),
                                            app.store().query_esm(t0, kDayEnd), o);
  CHECK(digest == digest::to_json(direct));
  CHECK(digest["summary_text"] == pptest::frozen()["digest_256"]["summary_text"]);

  const auto preview = app.prompt_preview(Json{{"question", "How did I sleep?"}});
  CHECK(preview["sections"].size() == 6);
  CHECK(preview["sections"][4]["body"] == "How did I sleep?");
  CHECK(preview["sections"][3]["body"] == digest::render_digest(direct));

  const auto run = app.run(Json::object());
  CHECK(run["status"] == "ok");
  CHECK(run["recommendation"]["backend_id"] == "phone");
  CHECK(app.get_run(run["run_id"].get<std::string>())["rec_id"] == run["rec_id"]);
  CHECK_THROWS_AS(app.get_run("run-missing"), ApiError);
  CHECK_THROWS_AS(app.run(Json{{"backend", "nosuch"}}), ApiError);
  CHECK(app.recommendations(10, std::nullopt)["recommendations"].size() == 1);

  const auto report = app.compare();
  REQUIRE(report.backends.size() == 1);
  CHECK(report.backends[0].backend_id == "phone");

  CHECK(app.health()["events"]["esm"] == 12);
}

TEST_CASE("a failing backend yields a failed run and no recommendation") {
  class Down final : public inference::HttpTransport {
   public:
    inference::HttpResponse post(const inference::HttpRequest&) override {
      throw inference::TransportFailure("connection refused");
    }
  };
  pptest::TempDir dir("app");
  SimulatedClock clock(kDayEnd);
  App app(test_config(dir.path() / "store"), clock, std::make_shared<Down>());
  const auto run = app.run(Json{{"backend", "llama"}});
  CHECK(run["status"] == "failed");
  CHECK(run["failure"]["stage"] == "generate");
  CHECK(app.recommendations(10, std::nullopt)["recommendations"].empty());
}

TEST_CASE("scheduled ESM delivery through the app") {
  pptest::TempDir dir("app");
  SimulatedClock clock(kDayEnd + 8 * kMsPerHour);
  auto cfg = test_config(dir.path() / "store");
  cfg.rules_path = pptest::fixture("rules.json");
  App app(cfg, clock);
  app.tick();
  CHECK(app.esm_pending()["pending"].empty());
  clock.set(kDayEnd + 9 * kMsPerHour + 5 * kMsPerMinute);
  const auto fired = app.tick();
  REQUIRE(fired.size() == 1);
  CHECK(fired[0].outcome == orchestrator::FireOutcome::kCaughtUp);
  const auto pending = app.esm_pending()["pending"];
  REQUIRE(pending.size() == 1);
  CHECK(pending[0]["slot"] == "morning");
  app.esm_answer(Json{{"factor", "sleep_quality"}, {"answer", "bad sleep"}, {"scale_value", 2}});
  CHECK(app.esm_pending()["pending"][0]["remaining"].size() == 5);
  CHECK_THROWS_AS(app.esm_answer(Json{{"factor", "mood"}, {"answer", "x"}}), ApiError);
  const auto schedule = app.schedule_list();
  CHECK(schedule["rules"].size() == 2);
}

TEST_CASE("CLI commands") {
  pptest::TempDir dir("cli");
  Cli cli{dir.path()};
  auto r = cli({"ingest", "screentext", pptest::fixture("day.jsonl").string()});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("inserted 18 of 18 screentext events") != std::string::npos);
  r = cli({"ingest", "screentext", pptest::fixture("day.jsonl").string()});
  CHECK(r.out.find("inserted 0 of 18") != std::string::npos);
  CHECK(cli({"ingest", "esm", pptest::fixture("day_esm.jsonl").string()}).code == kExitOk);

  r = cli({"prompt", "preview", "--question", "How is my mental state?"});
  CHECK(r.code == kExitOk);
  for (const char* h : {"### Instruction", "### User Context", "### Domain Context", "### Sensing Context",
                        "### Question", "### Output Format"}) {
    CHECK(r.out.find(h) != std::string::npos);
  }
  CHECK(r.out.find("student complain about assignment score") != std::string::npos);

  r = cli({"digest", "--from", "2024-06-03T00:00:00+10:00", "--to", "2024-06-04T00:00:00+10:00"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("bad sleep") != std::string::npos);

  r = cli({"run", "--backend", "nosuch"});
  CHECK(r.code == kExitApiError);
  CHECK(r.err.find("not_found") != std::string::npos);

  r = cli({"--json", "run", "--backend", "nosuch"});
  CHECK(r.code == kExitApiError);
  CHECK(Json::parse(r.out)["error"]["code"] == "not_found");

  r = cli({"--json", "run"});
  CHECK(r.code == kExitOk);
  const auto run = Json::parse(r.out);
  CHECK(run["status"] == "ok");

  r = cli({"--json", "recommendations"});
  CHECK(Json::parse(r.out)["recommendations"].size() == 1);

  r = cli({"esm", "answer", "sleep_quality", "slept badly", "--scale", "7"});
  CHECK(r.code == kExitApiError);
  r = cli({"esm", "answer", "sleep_quality", "slept badly", "--scale", "2", "--at", "1717369300000"});
  CHECK(r.code == kExitOk);

  r = cli({"report", "compare"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("phone") != std::string::npos);

  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"digest", "--budget", "abc"}).code == kExitUsage);
  CHECK(cli({}).code == kExitUsage);

  cli.env = {{"POCKETPILOT_DEFAULT_BACKEND", "nosuch"}};
  CHECK(cli({"run"}).code != kExitOk);
}

TEST_CASE("HTTP endpoints") {
  pptest::TempDir dir("http");
  SimulatedClock clock(kDayEnd);
  App app(test_config(dir.path() / "store"), clock);
  ServerOptions opts;
  opts.port = 0;
  opts.tick_interval_ms = 0;
  HttpServer server(app, opts);
  server.start();
  httplib::Client client("127.0.0.1", server.port());

  auto res = client.Get("/api/recommendations");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(Json::parse(res->body)["recommendations"].empty());

  res = client.Get("/api/health");
  REQUIRE(res);
  CHECK(Json::parse(res->body)["status"] == "ok");

  res = client.Post("/api/ingest/screentext", pptest::read_file(pptest::fixture("day.jsonl")), "application/x-ndjson");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(Json::parse(res->body)["inserted"] == 18);

  res = client.Post("/api/esm/answer", R"({"factor":"mood","answer":"x"})", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  CHECK(Json::parse(res->body)["error"]["code"] == "bad_request");

  res = client.Post("/api/esm/answer", "not json", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);

  res = client.Post("/api/esm/answer",
                    R"({"factor":"sleep_quality","answer":"bad sleep","scale_value":2,"timestamp":1717369200000})",
                    "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);

  res = client.Get("/api/events?kind=esm&from=1717336800000&to=1717423200000");
  REQUIRE(res);
  CHECK(res->status == 200);
  const auto events = Json::parse(res->body)["events"];
  REQUIRE(events.size() == 1);
  CHECK(events[0]["answer"] == "bad sleep");

  res = client.Post("/api/prompt/preview", R"({"question":"How did I sleep?"})", "application/json");
  REQUIRE(res);
  CHECK(Json::parse(res->body)["sections"].size() == 6);

  res = client.Post("/api/run", "{}", "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  const auto run = Json::parse(res->body);
  CHECK(run["status"] == "ok");

  res = client.Get("/api/runs/" + run["run_id"].get<std::string>());
  REQUIRE(res);
  const auto fetched = Json::parse(res->body);
  REQUIRE(fetched["stages"].size() == 6);
  for (const auto& s : fetched["stages"]) CHECK(s["status"] == "ok");

  res = client.Get("/api/runs/run-missing");
  REQUIRE(res);
  CHECK(res->status == 404);

  res = client.Post("/api/run", R"({"backend":"nosuch"})", "application/json");
  REQUIRE(res);
  CHECK(res->status == 404);

  res = client.Get("/api/recommendations?limit=5");
  REQUIRE(res);
  CHECK(Json::parse(res->body)["recommendations"].size() == 1);

  res = client.Get("/api/metrics/compare");
  REQUIRE(res);
  CHECK(res->status == 200);
  res = client.Get("/api/metrics/compare?format=text");
  REQUIRE(res);
  CHECK(res->body.find("phone") != std::string::npos);

  res = client.Get("/api/events?kind=esm&from=10&to=5");
  REQUIRE(res);
  CHECK(res->status == 400);

  SUBCASE("a second server on the same port is refused") {
    ServerOptions same = opts;
    same.port = server.port();
    HttpServer other(app, same);
    CHECK_THROWS_AS(other.start(), PortInUse);
  }
  server.stop();
}

TEST_CASE("remote binding requires an explicit opt-in") {
  pptest::TempDir dir("http");
  SimulatedClock clock(kDayEnd);
  App app(test_config(dir.path() / "store"), clock);
  CHECK(is_loopback("127.0.0.1"));
  CHECK(is_loopback("localhost"));
  CHECK(is_loopback("::1"));
  CHECK_FALSE(is_loopback("0.0.0.0"));
  ServerOptions opts;
  opts.host = "0.0.0.0";
  CHECK_THROWS_AS(HttpServer(app, opts), ConfigError);
  opts.allow_remote = true;
  opts.port = 0;
  opts.tick_interval_ms = 0;
  HttpServer server(app, opts);
  server.start();
  CHECK(server.port() > 0);
  server.stop();
}
