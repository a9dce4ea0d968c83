#include "pocketpilot/prompt/tokenizer.hpp"

#include "pocketpilot/common/utf8.hpp"

namespace pocketpilot::prompt {

int HeuristicTokenizer::count(std::string_view text) const {
  const std::size_t cps = utf8::codepoint_count(text);
  return static_cast<int>((cps + 3) / 4);
}

const Tokenizer& default_tokenizer() {
  static const HeuristicTokenizer tokenizer;
  return tokenizer;
}

}  // namespace pocketpilot::prompt
