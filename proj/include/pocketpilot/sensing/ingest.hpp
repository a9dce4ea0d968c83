#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "pocketpilot/common/error.hpp"
#include "pocketpilot/sensing/events.hpp"

namespace pocketpilot::sensing {

class IngestError : public Error {
 public:
  IngestError(const std::string& what, std::size_t line_no) : Error(what), line_no_(line_no) {}
  std::size_t line_no() const { return line_no_; }

 private:
  std::size_t line_no_;
};

// Line could not be decoded, or a field holds an invalid value.
class MalformedLine : public IngestError {
 public:
  MalformedLine(std::size_t line_no, const std::string& reason);
};

class MissingField : public IngestError {
 public:
  MissingField(std::string name, std::size_t line_no);
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

// Parse line-delimited JSON exports. Blank lines are skipped; any other bad
// line aborts the whole call. Line numbers are 1-based.
std::vector<ScreentextEvent> ingest_screentext(std::istream& in);
std::vector<ScreentextEvent> ingest_screentext(std::string_view data);
std::vector<EsmResponse> ingest_esm(std::istream& in);
std::vector<EsmResponse> ingest_esm(std::string_view data);

// Single-record parsers shared with the service API (line_no is reported in errors).
ScreentextEvent parse_screentext_record(const Json& obj, std::size_t line_no);
EsmResponse parse_esm_record(const Json& obj, std::size_t line_no);

std::string serialize_export(const std::vector<ScreentextEvent>& events);
std::string serialize_export(const std::vector<EsmResponse>& events);

}  // namespace pocketpilot::sensing
