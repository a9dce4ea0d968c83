#pragma once

#include <cstdint>

namespace pocketpilot {

// UTC milliseconds since the Unix epoch.
using UtcMs = std::int64_t;

inline constexpr UtcMs kMsPerSecond = 1000;
inline constexpr UtcMs kMsPerMinute = 60 * kMsPerSecond;
inline constexpr UtcMs kMsPerHour = 60 * kMsPerMinute;
inline constexpr UtcMs kMsPerDay = 24 * kMsPerHour;

}  // namespace pocketpilot
