#include "pocketpilot/sensing/fingerprint.hpp"

#include "pocketpilot/common/hash.hpp"

namespace pocketpilot::sensing {

namespace {

void put_field(Sha256& h, std::string_view field) {
  h.update(std::to_string(field.size()));
  h.update(":");
  h.update(field);
  h.update(";");
}

}  // namespace

std::string event_fingerprint(std::string_view device_id, UtcMs timestamp,
                              std::string_view package_name_or_factor, std::string_view payload) {
  Sha256 h;
  put_field(h, device_id);
  put_field(h, std::to_string(timestamp));
  put_field(h, package_name_or_factor);
  put_field(h, payload);
  return h.hex_digest();
}

}  // namespace pocketpilot::sensing
