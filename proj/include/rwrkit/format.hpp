#pragma once

#include <string>
#include <string_view>

namespace rwrkit {

// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);

// Inverse of format_double. Returns false on malformed input.
bool parse_double(std::string_view text, double& value);

}  // namespace rwrkit
