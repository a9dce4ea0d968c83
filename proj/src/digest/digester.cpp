#include "pocketpilot/digest/digester.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <unordered_map>

#include "pocketpilot/common/utf8.hpp"
#include "pocketpilot/prompt/sentences.hpp"

namespace pocketpilot::digest {

BudgetTooSmall::BudgetTooSmall(int needed, int budget)
    : Error("digest budget of " + std::to_string(budget) + " tokens is too small (needs at least " +
            std::to_string(needed) + ")") {}

namespace {

constexpr std::array<std::string_view, 58> kStopwords = {
    "a",     "about", "after", "all",   "am",   "an",    "and",   "are",  "as",    "at",
    "be",    "been",  "but",   "by",    "can",  "could", "did",   "do",   "for",   "from",
    "had",   "has",   "have",  "he",    "her",  "his",   "how",   "i",    "if",    "in",
    "is",    "it",    "its",   "me",    "my",   "no",    "not",   "of",   "on",    "or",
    "our",   "she",   "so",    "that",  "the",  "their", "then",  "there", "they", "this",
    "to",    "was",   "we",    "were",  "what", "with",  "you",   "your",
};

bool is_stopword(std::string_view w) {
  return std::find(kStopwords.begin(), kStopwords.end(), w) != kStopwords.end();
}

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

// Lowercased content terms; single ASCII characters and stopwords are dropped.
std::vector<std::string> terms_of(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (cur.size() > 1 && !is_stopword(cur)) {
      out.push_back(cur);
    }
    cur.clear();
  };
  for (const char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::string join_selected(std::string_view text, const std::vector<prompt::SentenceSpan>& spans,
                          const std::vector<bool>& selected) {
  std::string out;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (!selected[i]) continue;
    if (!out.empty()) out += ' ';
    out += text.substr(spans[i].start, spans[i].end - spans[i].start);
  }
  return out;
}

std::string join_lines(const std::vector<std::string>& texts) {
  std::string out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (i > 0) out += '\n';
    out += texts[i];
  }
  return out;
}

// Lines that would read as prompt headers lose their leading '#' run.
std::string strip_header_markup(std::string_view text) {
  std::string out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    if (line.starts_with("### ")) {
      line.remove_prefix(line.find_first_not_of('#'));
      line = utf8::trim(line);
    }
    out += line;
    if (nl == std::string_view::npos) break;
    out += '\n';
    pos = nl + 1;
  }
  return out;
}

// Cuts `text` back to its longest sentence prefix satisfying `fits`.
std::string shrink_to_fit(const std::string& text, const std::function<bool(const std::string&)>& fits) {
  if (fits(text)) return text;
  const auto ends = prompt::sentence_prefix_ends(text);
  for (std::size_t k = ends.size(); k-- > 0;) {
    std::string candidate = text.substr(0, ends[k]);
    if (fits(candidate)) return candidate;
  }
  return std::string();
}

class MapReduceFailed : public std::exception {};

std::string summarize_with_backend(const std::vector<std::string>& texts, int summary_budget,
                                   const DigestOptions& opts, const prompt::Tokenizer& tok) {
  inference::Backend& backend = *opts.backend;
  const int words = std::max(1, summary_budget * 3 / 4);
  const std::string instruction = summarization_instruction(words) + "\n\n";
  inference::GenerationParams params = opts.params;
  params.max_tokens = std::max(1, summary_budget);
  const int chunk_budget = backend.config().context_tokens - params.max_tokens - tok.count(instruction) - 1;
  if (chunk_budget <= 0) {
    throw MapReduceFailed();
  }

  auto summarize = [&](const std::string& chunk) {
    const std::string prompt_text = instruction + chunk;
    return std::string(utf8::trim(backend.generate(prompt_text, tok.count(prompt_text), params).text));
  };

  std::vector<std::string> level = texts;
  std::size_t previous_size = level.size() + 1;
  // Map, then reduce the joined summaries until a single summary remains.
  for (int depth = 0; depth < 8; ++depth) {
    const auto chunks = chunk_texts(level, chunk_budget, tok);
    if (chunks.size() >= previous_size) {
      throw MapReduceFailed();
    }
    previous_size = chunks.size();
    std::vector<std::string> next;
    next.reserve(chunks.size());
    for (const auto& c : chunks) {
      next.emplace_back(summarize(c));
    }
    if (next.size() == 1) {
      return next.front();
    }
    level = std::move(next);
  }
  throw MapReduceFailed();
}

}  // namespace

std::vector<std::string> render_esm(std::vector<sensing::EsmResponse> responses) {
  std::stable_sort(responses.begin(), responses.end(), [](const auto& a, const auto& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.event_id < b.event_id;
  });
  std::vector<std::string> lines;
  lines.reserve(responses.size());
  for (const auto& r : responses) {
    std::string line = "[";
    line += sensing::to_string(r.slot);
    line += "] ";
    line += sensing::to_string(r.factor);
    line += ": ";
    line += r.answer;
    if (r.scale_value) {
      line += " (" + std::to_string(*r.scale_value) + ")";
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<sensing::ScreentextEvent> coalesce_screentext(const std::vector<sensing::ScreentextEvent>& events) {
  std::vector<sensing::ScreentextEvent> out;
  for (const auto& e : events) {
    if (!out.empty() && out.back().package_name == e.package_name &&
        e.text.find(out.back().text) != std::string::npos) {
      out.back() = e;
      continue;
    }
    out.push_back(e);
  }
  return out;
}

std::string extractive_summary(std::string_view text, int budget, const prompt::Tokenizer& tokenizer) {
  if (budget < 1) {
    return std::string();
  }
  const auto spans = prompt::split_sentences(text);
  std::vector<std::vector<std::string>> sentence_terms;
  sentence_terms.reserve(spans.size());
  std::unordered_map<std::string, std::int64_t> tf;
  for (const auto& s : spans) {
    auto terms = terms_of(text.substr(s.start, s.end - s.start));
    for (const auto& t : terms) ++tf[t];
    sentence_terms.push_back(std::move(terms));
  }

  // score = sum / n, compared exactly by cross-multiplication.
  struct Score {
    std::int64_t sum;
    std::int64_t n;
  };
  std::vector<Score> scores;
  for (const auto& terms : sentence_terms) {
    Score sc{0, static_cast<std::int64_t>(terms.size())};
    for (const auto& t : terms) sc.sum += tf[t];
    scores.push_back(sc);
  }
  std::vector<std::size_t> order(spans.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto better = [&](std::size_t a, std::size_t b) {
    const Score& x = scores[a];
    const Score& y = scores[b];
    const std::int64_t lhs = x.n == 0 ? 0 : x.sum * std::max<std::int64_t>(y.n, 1);
    const std::int64_t rhs = y.n == 0 ? 0 : y.sum * std::max<std::int64_t>(x.n, 1);
    if (lhs != rhs) return lhs > rhs;
    return a < b;
  };
  std::sort(order.begin(), order.end(), better);

  std::vector<bool> selected(spans.size(), false);
  for (const std::size_t idx : order) {
    selected[idx] = true;
    if (tokenizer.count(join_selected(text, spans, selected)) > budget) {
      selected[idx] = false;
    }
  }
  return join_selected(text, spans, selected);
}

std::vector<std::string> chunk_texts(const std::vector<std::string>& texts, int chunk_budget,
                                     const prompt::Tokenizer& tokenizer) {
  std::vector<std::string> chunks;
  if (chunk_budget < 1) {
    chunk_budget = 1;
  }
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      chunks.push_back(std::move(current));
      current.clear();
    }
  };
  for (std::size_t i = 0; i < texts.size(); ++i) {
    std::string unit = texts[i];
    if (i + 1 < texts.size()) unit += '\n';
    if (tokenizer.count(current + unit) <= chunk_budget) {
      current += unit;
      continue;
    }
    flush();
    std::string_view rest = unit;
    while (!rest.empty()) {
      if (tokenizer.count(rest) <= chunk_budget) {
        current = std::string(rest);
        break;
      }
      // Longest code-point prefix within budget (at least one code point).
      std::size_t lo = 1;
      std::size_t hi = utf8::codepoint_count(rest);
      while (lo < hi) {
        const std::size_t mid = lo + (hi - lo + 1) / 2;
        if (tokenizer.count(utf8::prefix_codepoints(rest, mid)) <= chunk_budget) {
          lo = mid;
        } else {
          hi = mid - 1;
        }
      }
      const std::string_view piece = utf8::prefix_codepoints(rest, lo);
      chunks.emplace_back(piece);
      rest.remove_prefix(piece.size());
    }
  }
  flush();
  return chunks;
}

std::string summarization_instruction(int words) {
  return "Summarize the following smartphone screen text in at most " + std::to_string(words) +
         " words, preserving events, names, and emotional cues.";
}

SensingDigest digest_window(const std::vector<sensing::ScreentextEvent>& events,
                            const std::vector<sensing::EsmResponse>& esm, const DigestOptions& options) {
  const prompt::Tokenizer& tok = options.tokenizer ? *options.tokenizer : prompt::default_tokenizer();
  if (options.budget < kMinDigestBudget) {
    throw BudgetTooSmall(kMinDigestBudget, options.budget);
  }

  SensingDigest d;
  d.t0 = options.t0;
  d.t1 = options.t1;
  d.esm_lines = render_esm(esm);
  const std::string esm_block = render_digest("", d.esm_lines);
  const int esm_tokens = tok.count(esm_block);
  if (esm_tokens > options.budget) {
    throw BudgetTooSmall(esm_tokens, options.budget);
  }
  const int summary_budget = d.esm_lines.empty() ? options.budget : options.budget - tok.count("\n" + esm_block);

  std::vector<sensing::ScreentextEvent> sorted = events;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.event_id < b.event_id;
  });
  std::vector<std::string> texts;
  for (const auto& e : coalesce_screentext(sorted)) {
    texts.push_back(e.text);
  }

  std::string summary;
  d.method = DigestMethod::kExtractive;
  if (!texts.empty() && summary_budget > 0) {
    bool done = false;
    if (options.backend != nullptr) {
      try {
        summary = summarize_with_backend(texts, summary_budget, options, tok);
        d.method = DigestMethod::kLlmMapReduce;
        done = true;
      } catch (const inference::InferenceError&) {
      } catch (const MapReduceFailed&) {
      }
    }
    if (!done) {
      summary = extractive_summary(join_lines(texts), summary_budget, tok);
    }
  } else if (options.backend != nullptr) {
    d.method = DigestMethod::kLlmMapReduce;
  }

  summary = strip_header_markup(utf8::trim(summary));
  summary = shrink_to_fit(summary, [&](const std::string& s) {
    return tok.count(render_digest(s, d.esm_lines)) <= options.budget;
  });
  d.summary_text = std::string(utf8::trim(summary));
  d.token_count = tok.count(render_digest(d));
  return d;
}

}  // namespace pocketpilot::digest
