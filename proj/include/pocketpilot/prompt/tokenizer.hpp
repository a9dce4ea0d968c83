#pragma once

#include <string_view>

namespace pocketpilot::prompt {

// Token counting is pluggable; implementations must be monotone under
// concatenation: count(a + b) >= count(a).
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual int count(std::string_view text) const = 0;
};

// ceil(code points / 4).
class HeuristicTokenizer final : public Tokenizer {
 public:
  int count(std::string_view text) const override;
};

const Tokenizer& default_tokenizer();

inline int count_tokens(std::string_view text) { return default_tokenizer().count(text); }

}  // namespace pocketpilot::prompt
