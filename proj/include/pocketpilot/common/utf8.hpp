#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace pocketpilot::utf8 {

bool is_valid(std::string_view bytes);

// Number of code points; continuation bytes are not counted, so invalid input
// still yields a stable (if meaningless) count.
std::size_t codepoint_count(std::string_view bytes);

// Largest prefix of `bytes` holding at most `max_codepoints` code points.
std::string_view prefix_codepoints(std::string_view bytes, std::size_t max_codepoints);

std::string_view trim(std::string_view s);
std::string_view trim_right(std::string_view s);

}  // namespace pocketpilot::utf8
