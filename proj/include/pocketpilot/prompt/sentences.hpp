#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace pocketpilot::prompt {

// A sentence is a maximal run of text ending in a run of terminators
// ('.', '!', '?', '\n') or at end of input.
struct SentenceSpan {
  std::size_t start;  // first non-space byte
  std::size_t end;    // one past the last non-space byte (terminators included)
};

// Non-empty sentences in document order.
std::vector<SentenceSpan> split_sentences(std::string_view text);

// End offsets (after trailing whitespace trimming) of every sentence-prefix
// of `text`; element k is the end of the first k+1 sentences.
std::vector<std::size_t> sentence_prefix_ends(std::string_view text);

}  // namespace pocketpilot::prompt
