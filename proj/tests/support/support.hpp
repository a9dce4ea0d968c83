#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "pocketpilot/common/json.hpp"
#include "pocketpilot/inference/backend.hpp"
#include "pocketpilot/metering/meter.hpp"
#include "pocketpilot/prompt/assembler.hpp"

namespace pptest {

std::filesystem::path source_dir();
std::filesystem::path fixture(const std::string& name);
std::string read_file(const std::filesystem::path& p);
pocketpilot::Json frozen();

// Fresh empty directory under the build tree, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Random prompt specs for the structure properties: sentences of random
// words, some sections empty, occasional non-ASCII text.
pocketpilot::prompt::PromptSpec random_spec(std::mt19937_64& rng);

struct StructureCheck {
  bool ok = true;
  std::string failure;
  int assembled = 0;  // budgets that did not raise BudgetExhausted
};

// Order, round-trip, budget, fixed-section and monotonicity checks of one
// spec across ascending budgets.
StructureCheck check_prompt_structure(const pocketpilot::prompt::PromptSpec& spec, const std::vector<int>& budgets);

// Equal-token runs (900 prompt + 100 completion) for a 7B local server and a
// 175B cloud API, metered from hand-built results; matches the golden files.
struct ComparisonFixture {
  std::vector<pocketpilot::metering::MeterReport> runs;
  std::vector<pocketpilot::inference::BackendConfig> configs;
};
ComparisonFixture comparison_fixture();

}  // namespace pptest
