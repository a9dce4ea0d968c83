#include "pocketpilot/prompt/assembler.hpp"

#include <stdexcept>

#include "pocketpilot/common/utf8.hpp"
#include "pocketpilot/prompt/sentences.hpp"

namespace pocketpilot::prompt {

namespace {

constexpr std::array<std::string_view, kSectionCount> kHeaders = {
    "### Instruction", "### User Context", "### Domain Context",
    "### Sensing Context", "### Question", "### Output Format",
};

constexpr std::array<std::string_view, kSectionCount> kNames = {
    "instruction", "user_context", "domain_context", "sensing_context", "question", "output_format",
};

constexpr std::string_view kSeparator = "\n\n";

// Truncation order when over budget.
constexpr std::array<Section, 3> kTruncationOrder = {
    Section::kSensingContext, Section::kDomainContext, Section::kUserContext};

std::size_t index_of(Section s) { return static_cast<std::size_t>(s); }

bool has_markup(std::string_view body) {
  return body.starts_with("### ") || body.find("\n### ") != std::string_view::npos;
}

std::string rendered_body(std::string_view raw) {
  const std::string_view t = utf8::trim(raw);
  return t.empty() ? std::string(kEmptyPlaceholder) : std::string(t);
}

struct Rendering {
  std::string text;
  std::array<SectionSpan, kSectionCount> spans{};
};

Rendering render(const RenderedSections& bodies) {
  Rendering r;
  for (std::size_t i = 0; i < kSectionCount; ++i) {
    if (i > 0) {
      r.text += kSeparator;
    }
    r.text += kHeaders[i];
    r.text += '\n';
    const std::size_t start = r.text.size();
    r.text += bodies[i];
    r.spans[i] = SectionSpan{kSectionOrder[i], start, r.text.size()};
  }
  return r;
}

}  // namespace

std::string_view header_of(Section s) { return kHeaders[index_of(s)]; }
std::string_view name_of(Section s) { return kNames[index_of(s)]; }

BudgetExhausted::BudgetExhausted(int required, int budget)
    : PromptError("non-truncatable sections need " + std::to_string(required) +
                  " tokens but the prompt budget is " + std::to_string(budget)),
      required_(required),
      budget_(budget) {}

TokenBudget TokenBudget::make(int total, int generation_reserve) {
  if (generation_reserve <= 0 || generation_reserve >= total) {
    throw std::invalid_argument("token budget requires 0 < generation_reserve < total (got reserve " +
                                std::to_string(generation_reserve) + ", total " +
                                std::to_string(total) + ")");
  }
  return TokenBudget{total, generation_reserve};
}

std::string_view AssembledPrompt::body(Section s) const {
  const auto& span = section_spans[index_of(s)];
  return std::string_view(text).substr(span.start, span.end - span.start);
}

std::string render_user_profile(const sensing::UserProfile& profile) {
  std::string out;
  if (!utf8::trim(profile.display_name).empty()) {
    out += "Name: ";
    out += utf8::trim(profile.display_name);
  }
  for (const auto& d : profile.descriptors) {
    const auto line = utf8::trim(d);
    if (line.empty()) {
      continue;
    }
    if (!out.empty()) {
      out += '\n';
    }
    out += line;
  }
  return out;
}

AssembledPrompt assemble(const PromptSpec& spec, const TokenBudget& budget, const Tokenizer& tokenizer) {
  if (utf8::trim(spec.instruction).empty()) {
    throw InvalidPromptSpec("instruction must not be empty");
  }
  if (utf8::trim(spec.question).empty()) {
    throw InvalidPromptSpec("question must not be empty");
  }

  const std::array<std::string, kSectionCount> raw = {
      spec.instruction,
      spec.c_user,
      spec.c_domain,
      digest::render_digest(spec.c_sensing),
      spec.question,
      spec.output_format,
  };
  RenderedSections full;
  for (std::size_t i = 0; i < kSectionCount; ++i) {
    if (has_markup(raw[i])) {
      throw InvalidPromptSpec(std::string(kNames[i]) + " contains a '### ' header line");
    }
    full[i] = rendered_body(raw[i]);
  }

  const int limit = budget.prompt_budget();
  auto fits = [&](const RenderedSections& bodies) { return tokenizer.count(render(bodies).text) <= limit; };

  RenderedSections bodies = full;
  if (!fits(bodies)) {
    RenderedSections minimal = full;
    for (const Section s : kTruncationOrder) {
      minimal[index_of(s)] = std::string(kEmptyPlaceholder);
    }
    const int required = tokenizer.count(render(minimal).text);
    if (required > limit) {
      throw BudgetExhausted(required, limit);
    }

    for (const Section s : kTruncationOrder) {
      const std::size_t idx = index_of(s);
      const std::string source = full[idx];
      const auto ends = sentence_prefix_ends(source);
      bool placed = false;
      // Largest sentence prefix that fits, scanning down from the full body.
      for (std::size_t k = ends.size(); k-- > 0;) {
        bodies[idx] = source.substr(0, ends[k]);
        if (fits(bodies)) {
          placed = true;
          break;
        }
      }
      if (placed) {
        break;
      }
      bodies[idx] = std::string(kEmptyPlaceholder);
      if (fits(bodies)) {
        break;
      }
    }
  }

  Rendering r = render(bodies);
  AssembledPrompt out;
  out.token_count = tokenizer.count(r.text);
  out.text = std::move(r.text);
  out.section_spans = r.spans;
  out.budget = limit;
  for (std::size_t i = 0; i < kSectionCount; ++i) {
    out.truncated[i] = bodies[i] != full[i];
  }
  return out;
}

RenderedSections parse_sections(std::string_view text) {
  RenderedSections out;
  std::string first(kHeaders[0]);
  first += '\n';
  if (!text.starts_with(first)) {
    throw NotAnAssembledPrompt("prompt does not start with '" + std::string(kHeaders[0]) + "'");
  }
  std::size_t body_start = first.size();
  for (std::size_t i = 1; i <= kSectionCount; ++i) {
    std::size_t body_end = text.size();
    std::size_t next_start = text.size();
    if (i < kSectionCount) {
      std::string delim(kSeparator);
      delim += kHeaders[i];
      delim += '\n';
      const std::size_t found = text.find(delim, body_start);
      if (found == std::string_view::npos) {
        throw NotAnAssembledPrompt("missing or misplaced header '" + std::string(kHeaders[i]) + "'");
      }
      body_end = found;
      next_start = found + delim.size();
    }
    const std::string_view body = text.substr(body_start, body_end - body_start);
    if (has_markup(body)) {
      throw NotAnAssembledPrompt("unexpected header inside section '" + std::string(kNames[i - 1]) + "'");
    }
    out[i - 1] = std::string(body);
    body_start = next_start;
  }
  return out;
}

Json to_json(const AssembledPrompt& p, const Tokenizer& tokenizer) {
  Json sections = Json::array();
  for (std::size_t i = 0; i < kSectionCount; ++i) {
    const auto& span = p.section_spans[i];
    const std::string_view body = p.body(span.section);
    sections.push_back(Json{{"name", kNames[i]},
                            {"header", kHeaders[i]},
                            {"start", span.start},
                            {"end", span.end},
                            {"body", body},
                            {"tokens", tokenizer.count(body)},
                            {"truncated", p.truncated[i]}});
  }
  return Json{{"text", p.text}, {"token_count", p.token_count}, {"budget", p.budget}, {"sections", sections}};
}

}  // namespace pocketpilot::prompt
