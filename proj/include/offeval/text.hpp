#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace offeval::text {

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

// Strict parsers; `what` names the field in error messages.
double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);
std::uint64_t parse_u64(std::string_view s, std::string_view what);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view line, char sep);

bool starts_with(std::string_view s, std::string_view prefix);

}  // namespace offeval::text
