#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <thread>

#include "pocketpilot/common/clock.hpp"
#include "pocketpilot/inference/chat_backend.hpp"
#include "pocketpilot/inference/factory.hpp"
#include "pocketpilot/inference/mock_backend.hpp"
#include "pocketpilot/inference/transport.hpp"
#include "pocketpilot/prompt/tokenizer.hpp"

using namespace pocketpilot;
using namespace pocketpilot::inference;

namespace {

class RecordingTransport final : public HttpTransport {
 public:
  explicit RecordingTransport(HttpResponse reply) : reply_(std::move(reply)) {}
  HttpResponse post(const HttpRequest& request) override {
    requests.push_back(request);
    if (fail) throw TransportFailure("connection refused");
    return reply_;
  }
  std::vector<HttpRequest> requests;
  bool fail = false;

 private:
  HttpResponse reply_;
};

BackendConfig chat_config(const std::string& url, BackendKind kind = BackendKind::kLocalServer) {
  BackendConfig c;
  c.backend_id = "llama";
  c.kind = kind;
  c.endpoint_url = url;
  c.model_name = "llama-3-8b";
  c.param_count_billion = Decimal(8);
  c.context_tokens = 2048;
  if (kind == BackendKind::kCloudApi) c.price_usd_per_mtok = Decimal(5);
  return c;
}

const char* kOkReply =
    R"({"choices":[{"message":{"role":"assistant","content":"Sleep earlier."}}],"usage":{"prompt_tokens":11,"completion_tokens":3}})";

}  // namespace

TEST_CASE("mock: first matching rule wins, any-rule as default") {
  SimulatedClock clock(0);
  MockBackend mock(mock_config("mock"),
                   {{std::string("sleep"), "establish a consistent sleep schedule", 0},
                    {std::nullopt, "default reply", 0}},
                   clock);
  GenerationParams params;
  CHECK(mock.generate("I could not sleep", 5, params).text == "establish a consistent sleep schedule");
  CHECK(mock.generate("something else", 5, params).text == "default reply");
  const auto a = mock.generate("same prompt", 5, params);
  const auto b = mock.generate("same prompt", 5, params);
  CHECK(a.text == b.text);
  CHECK(a.completion_tokens == b.completion_tokens);
  CHECK(mock.call_count() == 4);
  CHECK(mock.received_prompts()[0] == "I could not sleep");
  CHECK(a.completion_tokens == prompt::count_tokens("default reply"));
  CHECK(a.prompt_tokens == 5);
  CHECK(a.backend_id == "mock");
}

TEST_CASE("mock: no matching rule is a backend error") {
  SimulatedClock clock(0);
  MockBackend mock(mock_config("mock"), {{std::string("zzz"), "x", 0}}, clock);
  try {
    mock.generate("hello", 1, {});
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(e.status() == 404);
  }
}

TEST_CASE("mock: injected delay is measured exactly on the simulated clock") {
  SimulatedClock clock(1000);
  MockBackend mock(mock_config("mock"), {{std::nullopt, "ok", 50}}, clock);
  const auto r = mock.generate("p", 1, {});
  CHECK(r.text == "ok");
  CHECK(r.latency_ms == doctest::Approx(50.0));
  CHECK(clock.now_ms() == 1050);
}

TEST_CASE("mock: injected delay on the system clock stays above the delay") {
  MockBackend mock(mock_config("mock"), {{std::nullopt, "ok", 50}}, system_clock());
  for (int i = 0; i < 3; ++i) {
    const auto r = mock.generate("p", 1, {});
    CHECK(r.latency_ms >= 50.0);
    CHECK(r.latency_ms <= 150.0);
  }
}

TEST_CASE("context overflow is detected before any request") {
  auto transport = std::make_shared<RecordingTransport>(HttpResponse{200, kOkReply});
  SimulatedClock clock(0);
  ChatCompletionsBackend backend(chat_config("http://127.0.0.1:9"), transport, clock);
  GenerationParams params;
  params.max_tokens = 256;
  CHECK_THROWS_AS(backend.generate(std::string(16000, 'x'), 4000, params), ContextOverflow);
  CHECK(transport->requests.empty());
  CHECK_THROWS_AS(backend.generate("x", 2048 - 255, params), ContextOverflow);
  CHECK_NOTHROW(backend.generate("x", 2048 - 256, params));
  CHECK(transport->requests.size() == 1);
}

TEST_CASE("chat request wire shape") {
  auto cfg = chat_config("http://127.0.0.1:8080/");
  GenerationParams params;
  params.max_tokens = 64;
  params.temperature = 0.2;
  CHECK(build_chat_request(cfg, "hi", params).dump() ==
        R"({"model":"llama-3-8b","messages":[{"role":"user","content":"hi"}],"max_tokens":64,"temperature":0.2})");
  params.seed = 7;
  CHECK(build_chat_request(cfg, "hi", params)["seed"] == 7);
}

TEST_CASE("chat backend posts to the completions path with bearer auth") {
  auto transport = std::make_shared<RecordingTransport>(HttpResponse{200, kOkReply});
  SimulatedClock clock(0);
  auto cfg = chat_config("https://api.example.com/openai/", BackendKind::kCloudApi);
  cfg.api_key = "sk-test";
  ChatCompletionsBackend backend(cfg, transport, clock);
  const auto r = backend.generate("prompt text", 3, {});
  CHECK(r.text == "Sleep earlier.");
  CHECK(r.prompt_tokens == 11);
  CHECK(r.completion_tokens == 3);
  REQUIRE(transport->requests.size() == 1);
  const auto& req = transport->requests[0];
  CHECK(req.url == "https://api.example.com/openai/v1/chat/completions");
  bool auth = false;
  for (const auto& [k, v] : req.headers) auth = auth || (k == "Authorization" && v == "Bearer sk-test");
  CHECK(auth);
  CHECK(Json::parse(req.body)["messages"][0]["content"] == "prompt text");
  CHECK(req.timeouts.connect_s == 5.0);
  CHECK(req.timeouts.total_s == 120.0);
}

TEST_CASE("chat backend without usage falls back to local counts") {
  auto transport = std::make_shared<RecordingTransport>(
      HttpResponse{200, R"({"choices":[{"message":{"content":"abcdefgh"}}]})"});
  SimulatedClock clock(0);
  ChatCompletionsBackend backend(chat_config("http://127.0.0.1:8080"), transport, clock);
  const auto r = backend.generate("prompt", 2, {});
  CHECK(r.prompt_tokens == 2);
  CHECK(r.completion_tokens == 2);
  for (const auto& [k, v] : transport->requests[0].headers) CHECK(k != "Authorization");
}

TEST_CASE("chat backend errors") {
  SimulatedClock clock(0);
  auto status500 = std::make_shared<RecordingTransport>(HttpResponse{500, "overloaded"});
  ChatCompletionsBackend a(chat_config("http://127.0.0.1:8080"), status500, clock);
  try {
    a.generate("p", 1, {});
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(e.status() == 500);
    CHECK(e.body() == "overloaded");
  }
  auto garbage = std::make_shared<RecordingTransport>(HttpResponse{200, R"({"choices":[]})"});
  ChatCompletionsBackend b(chat_config("http://127.0.0.1:8080"), garbage, clock);
  CHECK_THROWS_AS(b.generate("p", 1, {}), BackendError);
  auto down = std::make_shared<RecordingTransport>(HttpResponse{});
  down->fail = true;
  ChatCompletionsBackend c(chat_config("http://127.0.0.1:8080"), down, clock);
  CHECK_THROWS_AS(c.generate("p", 1, {}), BackendUnreachable);
  CHECK_THROWS_AS(parse_chat_response(200, "not json"), BackendError);
}

TEST_CASE("real transport against a stub local server") {
  httplib::Server server;
  std::string seen_body;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_body = req.body;
    res.set_content(kOkReply, "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  SimulatedClock clock(0);
  auto backend = make_backend(chat_config("http://127.0.0.1:" + std::to_string(port)), clock);
  const auto r = backend->generate("hello local", 3, {});
  CHECK(r.text == "Sleep earlier.");
  CHECK(Json::parse(seen_body)["model"] == "llama-3-8b");
  server.stop();
  t.join();
}

TEST_CASE("unreachable endpoint fails within the connect timeout") {
  httplib::Server probe;
  const int port = probe.bind_to_any_port("127.0.0.1");  // bound, then released unused
  probe.stop();
  auto cfg = chat_config("http://127.0.0.1:" + std::to_string(port));
  cfg.timeouts.connect_s = 1.0;
  cfg.timeouts.total_s = 2.0;
  auto backend = make_backend(cfg, system_clock());
  const double t0 = system_clock().monotonic_ms();
  CHECK_THROWS_AS(backend->generate("x", 1, {}), BackendUnreachable);
  CHECK(system_clock().monotonic_ms() - t0 < 3000.0);
}

TEST_CASE("config validation") {
  auto ok = chat_config("http://h:1");
  CHECK_NOTHROW(ok.validate());
  auto c = ok;
  c.price_usd_per_mtok = Decimal(1);
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ok;
  c.endpoint_url = "";
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ok;
  c.param_count_billion = Decimal(0);
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ok;
  c.context_tokens = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  auto m = mock_config("m");
  m.mock_script.clear();
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_backend(m, system_clock()), std::invalid_argument);
  auto cloud = chat_config("https://x", BackendKind::kCloudApi);
  cloud.api_key = "secret";
  CHECK_FALSE(cloud.is_local());
  CHECK(to_json(cloud).dump().find("secret") == std::string::npos);
}

TEST_CASE("split_url") {
  CHECK(split_url("http://127.0.0.1:8080") == std::pair<std::string, std::string>{"http://127.0.0.1:8080", ""});
  CHECK(split_url("https://a.b/c/d/") == std::pair<std::string, std::string>{"https://a.b", "/c/d"});
  CHECK_THROWS_AS(split_url("127.0.0.1:80"), std::invalid_argument);
  CHECK_THROWS_AS(split_url("ftp://x"), std::invalid_argument);
  CHECK_THROWS_AS(split_url("http://"), std::invalid_argument);
}

TEST_CASE("one generation in flight per backend") {
  class Probe final : public Backend {
   public:
    using Backend::Backend;
    std::atomic<int> active{0};
    std::atomic<int> peak{0};

   protected:
    Reply exchange(std::string_view, const GenerationParams&) override {
      const int now = ++active;
      int p = peak.load();
      while (now > p && !peak.compare_exchange_weak(p, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      --active;
      return Reply{"ok", std::nullopt, std::nullopt};
    }
  };
  Probe backend(mock_config("probe"), system_clock(), prompt::default_tokenizer());
  std::vector<std::thread> threads;
  for (int i = 0; i < 4; ++i) {
    threads.emplace_back([&] {
      for (int k = 0; k < 5; ++k) backend.generate("p", 1, {});
    });
  }
  for (auto& t : threads) t.join();
  CHECK(backend.peak.load() == 1);
}
