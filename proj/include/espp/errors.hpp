#pragma once

#include <stdexcept>
#include <string>

namespace espp {

// Raised when a request leaves the 64-bit integer domain of the engine
// (product bounds above 2^63-1, saturated count cells). The caller must
// lower the bound; values are never widened silently.
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace espp
