#pragma once

#include <optional>
#include <string>

namespace gridquant {

/// Shortest round-trip decimal representation.
std::string format_real(double value);
std::string format_real(const std::optional<double>& value);  ///< empty when absent

}  // namespace gridquant
