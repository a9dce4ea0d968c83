#pragma once

#include <stdexcept>
#include <string>

namespace pocketpilot {

// Root of every error the library throws on purpose. Callers that only care
// about "our" failures (as opposed to bad_alloc and friends) catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pocketpilot
