#pragma once

#include <nlohmann/json.hpp>

namespace pocketpilot {

// Insertion-ordered so that serialized records keep the documented key order.
using Json = nlohmann::ordered_json;

}  // namespace pocketpilot
