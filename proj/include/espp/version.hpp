#pragma once

#include <string_view>

namespace espp {

// Engine tag recorded in checkpoints; a resume across incompatible engines
// is rejected by the fingerprint check.
inline constexpr std::string_view kEngineVersion = "espp/0.1.0";

}  // namespace espp
