#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pocketpilot/common/json.hpp"
#include "pocketpilot/common/time.hpp"

namespace pocketpilot::digest {

enum class DigestMethod { kLlmMapReduce, kExtractive };

std::string_view to_string(DigestMethod m);

// Budgeted summary of one sensing window; the rendered form is the sensing
// context section of a prompt.
struct SensingDigest {
  UtcMs t0 = 0;
  UtcMs t1 = 0;
  std::string summary_text;
  std::vector<std::string> esm_lines;
  int token_count = 0;
  DigestMethod method = DigestMethod::kExtractive;
};

// summary_text, then the ESM lines one per line, separated by a newline.
std::string render_digest(std::string_view summary_text, const std::vector<std::string>& esm_lines);
inline std::string render_digest(const SensingDigest& d) { return render_digest(d.summary_text, d.esm_lines); }

Json to_json(const SensingDigest& d);

}  // namespace pocketpilot::digest
