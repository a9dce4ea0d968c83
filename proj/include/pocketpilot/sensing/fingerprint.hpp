#pragma once

#include <string>
#include <string_view>

#include "pocketpilot/common/time.hpp"

namespace pocketpilot::sensing {

// Hex SHA-256 over a length-prefixed encoding of the four fields, so that no
// two distinct tuples share an encoding.
std::string event_fingerprint(std::string_view device_id, UtcMs timestamp,
                              std::string_view package_name_or_factor, std::string_view payload);

}  // namespace pocketpilot::sensing
