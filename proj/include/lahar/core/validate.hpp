#pragma once

#include <string>
#include <vector>

#include "lahar/core/types.hpp"

namespace lahar::core {

/// Checks every HouseContext invariant. Returns one message per violation,
/// empty when the context is well formed; violations are data, not failures.
std::vector<std::string> validate_house_context(const HouseContext& ctx);

} // namespace lahar::core
