#pragma once

#include <string>
#include <string_view>

namespace tdram {

/// Shortest text form of a double that round-trips exactly.
std::string format_double(double v);

/// Parses a number with optional engineering suffix (f, p, n, u, m, k,
/// case-insensitive) after the usual decimal/scientific forms.
/// Returns false on malformed input; on failure *error names the problem.
bool parse_eng_number(std::string_view text, double* out, std::string* error);

}  // namespace tdram
