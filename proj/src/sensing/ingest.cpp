#include "pocketpilot/sensing/ingest.hpp"

#include <sstream>

#include "pocketpilot/common/utf8.hpp"

namespace pocketpilot::sensing {

MalformedLine::MalformedLine(std::size_t line_no, const std::string& reason)
    : IngestError("malformed line " + std::to_string(line_no) + ": " + reason, line_no) {}

MissingField::MissingField(std::string name, std::size_t line_no)
    : IngestError("missing field '" + name + "' on line " + std::to_string(line_no), line_no),
      name_(std::move(name)) {}

namespace {

const Json& require(const Json& obj, const char* name, std::size_t line_no) {
  const auto it = obj.find(name);
  if (it == obj.end()) {
    throw MissingField(name, line_no);
  }
  return *it;
}

std::string require_string(const Json& obj, const char* name, std::size_t line_no) {
  const Json& v = require(obj, name, line_no);
  if (!v.is_string()) {
    throw MalformedLine(line_no, std::string("field '") + name + "' must be a string");
  }
  return v.get<std::string>();
}

UtcMs require_timestamp(const Json& obj, std::size_t line_no) {
  const Json& v = require(obj, "timestamp", line_no);
  if (!v.is_number_integer()) {
    throw MalformedLine(line_no, "field 'timestamp' must be an integer");
  }
  const auto ts = v.get<std::int64_t>();
  if (ts <= 0) {
    throw MalformedLine(line_no, "timestamp must be positive");
  }
  return ts;
}

template <typename Record, typename ParseFn>
std::vector<Record> ingest_lines(std::istream& in, ParseFn parse) {
  std::vector<Record> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (utf8::trim(line).empty()) {
      continue;
    }
    if (!utf8::is_valid(line)) {
      throw MalformedLine(line_no, "invalid UTF-8");
    }
    Json obj;
    try {
      obj = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw MalformedLine(line_no, e.what());
    }
    if (!obj.is_object()) {
      throw MalformedLine(line_no, "record is not a JSON object");
    }
    out.push_back(parse(obj, line_no));
  }
  if (in.bad()) {
    throw MalformedLine(line_no + 1, "read error");
  }
  return out;
}

}  // namespace

ScreentextEvent parse_screentext_record(const Json& obj, std::size_t line_no) {
  std::string device_id = require_string(obj, "device_id", line_no);
  const UtcMs ts = require_timestamp(obj, line_no);
  std::string package_name = require_string(obj, "package_name", line_no);
  std::string text = require_string(obj, "text", line_no);
  if (utf8::trim(text).empty()) {
    throw MalformedLine(line_no, "text is blank");
  }
  return make_screentext(std::move(device_id), ts, std::move(package_name), std::move(text));
}

EsmResponse parse_esm_record(const Json& obj, std::size_t line_no) {
  std::string device_id = require_string(obj, "device_id", line_no);
  const UtcMs ts = require_timestamp(obj, line_no);
  const std::string slot_text = require_string(obj, "slot", line_no);
  const auto slot = parse_slot(slot_text);
  if (!slot) {
    throw MalformedLine(line_no, "unknown slot '" + slot_text + "'");
  }
  const std::string factor_text = require_string(obj, "factor", line_no);
  const auto factor = parse_factor(factor_text);
  if (!factor) {
    throw MalformedLine(line_no, "unknown factor '" + factor_text + "'");
  }
  std::string answer = require_string(obj, "answer", line_no);
  std::optional<int> scale;
  if (const auto it = obj.find("scale_value"); it != obj.end() && !it->is_null()) {
    if (!it->is_number_integer()) {
      throw MalformedLine(line_no, "scale_value must be an integer");
    }
    const auto v = it->get<std::int64_t>();
    if (v < 1 || v > 5) {
      throw MalformedLine(line_no, "scale_value out of range [1,5]");
    }
    scale = static_cast<int>(v);
  }
  return make_esm(std::move(device_id), ts, *slot, *factor, std::move(answer), scale);
}

std::vector<ScreentextEvent> ingest_screentext(std::istream& in) {
  return ingest_lines<ScreentextEvent>(in, parse_screentext_record);
}

std::vector<ScreentextEvent> ingest_screentext(std::string_view data) {
  std::istringstream in{std::string(data)};
  return ingest_screentext(in);
}

std::vector<EsmResponse> ingest_esm(std::istream& in) {
  return ingest_lines<EsmResponse>(in, parse_esm_record);
}

std::vector<EsmResponse> ingest_esm(std::string_view data) {
  std::istringstream in{std::string(data)};
  return ingest_esm(in);
}

namespace {

template <typename Event>
std::string serialize_lines(const std::vector<Event>& events) {
  std::string out;
  for (const auto& e : events) {
    out += to_export_json(e).dump();
    out += '\n';
  }
  return out;
}

}  // namespace

std::string serialize_export(const std::vector<ScreentextEvent>& events) {
  return serialize_lines(events);
}

std::string serialize_export(const std::vector<EsmResponse>& events) {
  return serialize_lines(events);
}

}  // namespace pocketpilot::sensing
