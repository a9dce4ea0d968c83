#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pocketpilot/common/error.hpp"
#include "pocketpilot/digest/sensing_digest.hpp"
#include "pocketpilot/inference/backend.hpp"
#include "pocketpilot/prompt/tokenizer.hpp"
#include "pocketpilot/sensing/events.hpp"

namespace pocketpilot::digest {

inline constexpr int kMinDigestBudget = 32;

class BudgetTooSmall : public Error {
 public:
  BudgetTooSmall(int needed, int budget);
};

// `[slot] factor: answer (scale)` per response, chronological.
std::vector<std::string> render_esm(std::vector<sensing::EsmResponse> responses);

// Collapses repeated screen captures: a consecutive event from the same
// package whose text equals or contains the previous text replaces it.
std::vector<sensing::ScreentextEvent> coalesce_screentext(const std::vector<sensing::ScreentextEvent>& events);

// Whole input sentences picked greedily by mean corpus term frequency
// (earlier sentence wins ties) while the result stays within `budget`
// tokens. Output keeps document order, joined by single spaces.
std::string extractive_summary(std::string_view text, int budget,
                               const prompt::Tokenizer& tokenizer = prompt::default_tokenizer());

// Splits `texts` (joined with '\n') into contiguous pieces of at most
// `chunk_budget` tokens each; concatenating the pieces restores the joined
// text exactly. Pieces break at text boundaries where possible.
std::vector<std::string> chunk_texts(const std::vector<std::string>& texts, int chunk_budget,
                                     const prompt::Tokenizer& tokenizer = prompt::default_tokenizer());

// The fixed map/reduce summarization instruction for a target of `words` words.
std::string summarization_instruction(int words);

struct DigestOptions {
  UtcMs t0 = 0;
  UtcMs t1 = 0;
  int budget = 256;
  // Null selects the extractive path.
  inference::Backend* backend = nullptr;
  // Generation parameters for map and reduce calls; max_tokens is derived.
  inference::GenerationParams params{};
  const prompt::Tokenizer* tokenizer = nullptr;
};

// Summarizes a window: LLM map-reduce when a backend is given (falling back
// to extractive on any backend failure), ESM lines passed through verbatim.
SensingDigest digest_window(const std::vector<sensing::ScreentextEvent>& events,
                            const std::vector<sensing::EsmResponse>& esm, const DigestOptions& options);

}  // namespace pocketpilot::digest
