#include "pocketpilot/digest/sensing_digest.hpp"

namespace pocketpilot::digest {

std::string_view to_string(DigestMethod m) {
  return m == DigestMethod::kLlmMapReduce ? "llm_mapreduce" : "extractive";
}

std::string render_digest(std::string_view summary_text, const std::vector<std::string>& esm_lines) {
  std::string out(summary_text);
  for (const auto& line : esm_lines) {
    if (!out.empty()) {
      out += '\n';
    }
    out += line;
  }
  return out;
}

Json to_json(const SensingDigest& d) {
  return Json{{"window", Json{{"from", d.t0}, {"to", d.t1}}},
              {"summary_text", d.summary_text},
              {"esm_lines", d.esm_lines},
              {"token_count", d.token_count},
              {"method", to_string(d.method)},
              {"rendered", render_digest(d)}};
}

}  // namespace pocketpilot::digest
