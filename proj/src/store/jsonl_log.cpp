#include "pocketpilot/store/jsonl_log.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

namespace pocketpilot::store {

namespace fs = std::filesystem;

JsonlLog::JsonlLog(fs::path path) : path_(std::move(path)) {
  std::error_code ec;
  if (path_.has_parent_path()) {
    fs::create_directories(path_.parent_path(), ec);
    if (ec) {
      throw StorageFailure("cannot create directory '" + path_.parent_path().string() + "': " + ec.message());
    }
  }
  recover();
}

void JsonlLog::recover() {
  std::error_code ec;
  if (!fs::exists(path_, ec)) {
    return;
  }
  const std::string data = contents();
  if (data.empty() || data.back() == '\n') {
    return;
  }
  const auto last_nl = data.rfind('\n');
  const std::uintmax_t keep = last_nl == std::string::npos ? 0 : last_nl + 1;
  fs::resize_file(path_, keep, ec);
  if (ec) {
    throw StorageFailure("cannot truncate partial record in '" + path_.string() + "': " + ec.message());
  }
}

std::string JsonlLog::contents() const {
  std::ifstream in(path_, std::ios::binary);
  if (!in) {
    return std::string();
  }
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::vector<std::string> JsonlLog::read_lines() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> lines;
  std::istringstream in(contents());
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      lines.push_back(std::move(line));
    }
  }
  return lines;
}

std::vector<Json> JsonlLog::read_all() const {
  std::vector<Json> out;
  std::size_t line_no = 0;
  for (const auto& line : read_lines()) {
    ++line_no;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::parse_error& e) {
      throw StorageFailure("corrupt record " + std::to_string(line_no) + " in '" + path_.string() + "': " + e.what());
    }
  }
  return out;
}

void JsonlLog::append_lines(const std::vector<std::string>& lines) {
  if (lines.empty()) {
    return;
  }
  std::string batch;
  for (const auto& l : lines) {
    batch += l;
    batch += '\n';
  }
  std::lock_guard lock(mu_);
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) {
    throw StorageFailure("cannot open '" + path_.string() + "' for append");
  }
  out.write(batch.data(), static_cast<std::streamsize>(batch.size()));
  out.flush();
  if (!out) {
    throw StorageFailure("write to '" + path_.string() + "' failed");
  }
}

void JsonlLog::append(const Json& record) { append_lines({record.dump()}); }

}  // namespace pocketpilot::store
