#include "support/support.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iterator>
#include <unistd.h>

#include "pocketpilot/digest/sensing_digest.hpp"
#include "pocketpilot/prompt/sentences.hpp"
#include "pocketpilot/prompt/tokenizer.hpp"

namespace pptest {

namespace pp = pocketpilot;

std::filesystem::path source_dir() { return PP_SOURCE_DIR; }

std::filesystem::path fixture(const std::string& name) { return source_dir() / "fixtures" / name; }

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

pp::Json frozen() { return pp::Json::parse(read_file(source_dir() / "tests" / "oracles" / "frozen.json")); }

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::path(PP_SCRATCH_DIR) /
          (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

namespace {

const std::vector<std::string> kWords = {
    "sleep", "tired", "student", "email", "coffee", "lecture", "stress", "walk", "dinner", "pizza",
    "friend", "call", "late", "night", "morning", "score", "assignment", "calm", "anxious", "run",
    "phone", "screen", "music", "rain", "café", "naïve", "日本", "ok", "a", "the"};

std::string random_sentence(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> len(1, 12);
  std::uniform_int_distribution<std::size_t> pick(0, kWords.size() - 1);
  std::string s;
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) s += ' ';
    s += kWords[pick(rng)];
  }
  static const char* kEnds[] = {".", "!", "?", "...", ""};
  s += kEnds[std::uniform_int_distribution<int>(0, 4)(rng)];
  return s;
}

std::string random_body(std::mt19937_64& rng, int max_sentences, double empty_p) {
  if (std::bernoulli_distribution(empty_p)(rng)) return "";
  std::uniform_int_distribution<int> count(1, max_sentences);
  const int n = count(rng);
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (i > 0) out += std::bernoulli_distribution(0.2)(rng) ? "\n" : " ";
    out += random_sentence(rng);
  }
  return out;
}

bool ends_on_sentence(std::string_view whole, std::string_view part) {
  if (part.empty() || part == whole) return true;
  for (const auto e : pp::prompt::sentence_prefix_ends(whole)) {
    if (e == part.size()) return true;
  }
  return false;
}

std::string_view content(std::string_view body) {
  return body == pp::prompt::kEmptyPlaceholder ? std::string_view() : body;
}

}  // namespace

pp::prompt::PromptSpec random_spec(std::mt19937_64& rng) {
  pp::prompt::PromptSpec spec;
  spec.instruction = random_body(rng, 3, 0.0);
  spec.c_user = random_body(rng, 6, 0.15);
  spec.c_domain = random_body(rng, 10, 0.15);
  spec.c_sensing.summary_text = random_body(rng, 30, 0.15);
  const int esm = std::uniform_int_distribution<int>(0, 6)(rng);
  for (int i = 0; i < esm; ++i) spec.c_sensing.esm_lines.push_back("[morning] fatigue: " + random_sentence(rng));
  spec.question = random_body(rng, 2, 0.0);
  spec.output_format = random_body(rng, 2, 0.1);
  return spec;
}

StructureCheck check_prompt_structure(const pp::prompt::PromptSpec& spec, const std::vector<int>& budgets) {
  using pp::prompt::Section;
  StructureCheck out;
  auto fail = [&](const std::string& why) {
    out.ok = false;
    out.failure = why;
    return out;
  };
  const int reserve = 64;
  std::vector<pp::prompt::AssembledPrompt> results;
  for (const int b : budgets) {
    try {
      results.push_back(pp::prompt::assemble(spec, pp::prompt::TokenBudget::make(b + reserve, reserve)));
    } catch (const pp::prompt::BudgetExhausted&) {
      if (!results.empty()) return fail("BudgetExhausted at a larger budget than a success");
      continue;
    }
    const auto& p = results.back();
    if (p.token_count > b) return fail("token_count over budget at " + std::to_string(b));
    if (p.token_count != pp::prompt::count_tokens(p.text)) return fail("token_count mismatch");
    for (std::size_t i = 0; i < pp::prompt::kSectionCount; ++i) {
      const auto& s = p.section_spans[i];
      if (s.section != static_cast<Section>(i)) return fail("section order");
      if (s.start > s.end || s.end > p.text.size()) return fail("span out of range");
      if (i > 0 && p.section_spans[i - 1].end >= s.start) return fail("overlapping spans");
      const std::string header = std::string(pp::prompt::header_of(s.section)) + "\n";
      if (s.start < header.size() || p.text.compare(s.start - header.size(), header.size(), header) != 0) {
        return fail("header does not precede body");
      }
    }
    const auto parsed = pp::prompt::parse_sections(p.text);
    for (std::size_t i = 0; i < pp::prompt::kSectionCount; ++i) {
      if (parsed[i] != p.body(static_cast<Section>(i))) return fail("round trip");
    }
  }
  out.assembled = static_cast<int>(results.size());
  for (std::size_t k = 1; k < results.size(); ++k) {
    const auto& lo = results[k - 1];
    const auto& hi = results[k];
    for (const auto s : {Section::kInstruction, Section::kQuestion, Section::kOutputFormat}) {
      if (lo.body(s) != hi.body(s)) return fail("fixed section changed across budgets");
    }
    for (const auto s : {Section::kUserContext, Section::kDomainContext, Section::kSensingContext}) {
      const auto a = content(lo.body(s));
      const auto b = content(hi.body(s));
      if (!b.starts_with(a) || !ends_on_sentence(b, a)) return fail("truncation not monotone");
    }
  }
  return out;
}

ComparisonFixture comparison_fixture() {
  ComparisonFixture f;
  pp::inference::BackendConfig local;
  local.backend_id = "phone-7b";
  local.kind = pp::inference::BackendKind::kLocalServer;
  local.endpoint_url = "http://127.0.0.1:8080";
  local.model_name = "llama-7b";
  local.param_count_billion = pp::Decimal(7);
  pp::inference::BackendConfig cloud;
  cloud.backend_id = "cloud-175b";
  cloud.kind = pp::inference::BackendKind::kCloudApi;
  cloud.endpoint_url = "https://api.example.com";
  cloud.model_name = "gpt-3-175b";
  cloud.param_count_billion = pp::Decimal(175);
  cloud.price_usd_per_mtok = pp::Decimal(75);
  f.configs = {local, cloud};
  auto add = [&](const pp::inference::BackendConfig& cfg, double latency) {
    pp::inference::InferenceResult r;
    r.backend_id = cfg.backend_id;
    r.prompt_tokens = 900;
    r.completion_tokens = 100;
    r.latency_ms = latency;
    f.runs.push_back(pp::metering::meter_run(r, cfg));
  };
  add(cloud, 1240.0);
  add(local, 2300.0);
  add(local, 2100.0);
  add(cloud, 820.0);
  add(local, 2500.0);
  return f;
}

}  // namespace pptest
