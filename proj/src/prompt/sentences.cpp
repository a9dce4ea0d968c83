#include "pocketpilot/prompt/sentences.hpp"

namespace pocketpilot::prompt {

namespace {

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?' || c == '\n'; }

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

}  // namespace

std::vector<SentenceSpan> split_sentences(std::string_view text) {
  std::vector<SentenceSpan> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    std::size_t raw_start = i;
    while (i < n && !is_terminator(text[i])) {
      ++i;
    }
    while (i < n && is_terminator(text[i])) {
      ++i;
    }
    std::size_t s = raw_start;
    std::size_t e = i;
    while (s < e && is_space(text[s])) ++s;
    while (e > s && is_space(text[e - 1])) --e;
    if (e > s) {
      out.push_back({s, e});
    }
  }
  return out;
}

std::vector<std::size_t> sentence_prefix_ends(std::string_view text) {
  std::vector<std::size_t> ends;
  for (const auto& s : split_sentences(text)) {
    ends.push_back(s.end);
  }
  return ends;
}

}  // namespace pocketpilot::prompt
