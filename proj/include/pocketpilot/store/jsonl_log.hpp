#pragma once

#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include "pocketpilot/common/error.hpp"
#include "pocketpilot/common/json.hpp"

namespace pocketpilot::store {

class StorageFailure : public Error {
 public:
  using Error::Error;
};

// Append-only file of LF-terminated lines. A trailing partial line left by an
// interrupted write is cut off when the log is opened, so readers only ever
// see whole committed records.
class JsonlLog {
 public:
  explicit JsonlLog(std::filesystem::path path);

  const std::filesystem::path& path() const { return path_; }

  // Every committed line, in file order.
  std::vector<std::string> read_lines() const;
  std::vector<Json> read_all() const;

  // Writes all lines in one append and flushes; throws StorageFailure.
  void append_lines(const std::vector<std::string>& lines);
  void append(const Json& record);

  // Raw file bytes (empty when the file does not exist yet).
  std::string contents() const;

 private:
  void recover();

  std::filesystem::path path_;
  mutable std::mutex mu_;
};

}  // namespace pocketpilot::store
