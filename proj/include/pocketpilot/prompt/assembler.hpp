#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "pocketpilot/common/error.hpp"
#include "pocketpilot/common/json.hpp"
#include "pocketpilot/digest/sensing_digest.hpp"
#include "pocketpilot/prompt/tokenizer.hpp"
#include "pocketpilot/sensing/events.hpp"

namespace pocketpilot::prompt {

// Section order is fixed: Instruction, then Context (user, domain, sensing),
// then Question and Output Format.
enum class Section {
  kInstruction,
  kUserContext,
  kDomainContext,
  kSensingContext,
  kQuestion,
  kOutputFormat,
};

inline constexpr std::size_t kSectionCount = 6;
inline constexpr std::array<Section, kSectionCount> kSectionOrder = {
    Section::kInstruction,    Section::kUserContext, Section::kDomainContext,
    Section::kSensingContext, Section::kQuestion,    Section::kOutputFormat,
};

std::string_view header_of(Section s);  // e.g. "### Sensing Context"
std::string_view name_of(Section s);    // e.g. "sensing_context"

inline constexpr std::string_view kEmptyPlaceholder = "(none)";

class PromptError : public Error {
 public:
  using Error::Error;
};

class InvalidPromptSpec : public PromptError {
 public:
  using PromptError::PromptError;
};

// The non-truncatable sections (plus headers and placeholders) already exceed
// the prompt budget.
class BudgetExhausted : public PromptError {
 public:
  BudgetExhausted(int required, int budget);
  int required() const { return required_; }
  int budget() const { return budget_; }

 private:
  int required_;
  int budget_;
};

class NotAnAssembledPrompt : public PromptError {
 public:
  using PromptError::PromptError;
};

struct PromptSpec {
  std::string instruction;
  std::string c_user;
  std::string c_domain;
  digest::SensingDigest c_sensing;
  std::string question;
  std::string output_format;
};

struct TokenBudget {
  int total = 0;
  int generation_reserve = 0;

  // Throws std::invalid_argument unless 0 < generation_reserve < total.
  static TokenBudget make(int total, int generation_reserve);
  int prompt_budget() const { return total - generation_reserve; }
};

struct SectionSpan {
  Section section;
  std::size_t start;  // body offsets within text; headers are excluded
  std::size_t end;
};

struct AssembledPrompt {
  std::string text;
  std::array<SectionSpan, kSectionCount> section_spans{};
  std::array<bool, kSectionCount> truncated{};
  int token_count = 0;
  int budget = 0;

  std::string_view body(Section s) const;
};

using RenderedSections = std::array<std::string, kSectionCount>;

// Renders one user profile as the user-context body: the display name line,
// then one descriptor per line.
std::string render_user_profile(const sensing::UserProfile& profile);

// Headed concatenation of the six sections. When over budget the sensing,
// domain and user sections are cut back (in that order) to sentence
// boundaries; instruction, question and output format are never touched.
AssembledPrompt assemble(const PromptSpec& spec, const TokenBudget& budget,
                         const Tokenizer& tokenizer = default_tokenizer());

// Inverse of the rendering step; recovers bodies exactly as rendered.
RenderedSections parse_sections(std::string_view prompt_text);

Json to_json(const AssembledPrompt& p, const Tokenizer& tokenizer = default_tokenizer());

}  // namespace pocketpilot::prompt
