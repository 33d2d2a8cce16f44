#include "tdram/text.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>

namespace tdram {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool parse_eng_number(std::string_view text, double* out, std::string* error) {
  if (text.empty()) {
    if (error) *error = "empty number";
    return false;
  }
  double value = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr == text.data()) {
    if (error) *error = "malformed number '" + std::string(text) + "'";
    return false;
  }
  std::string_view rest(res.ptr, static_cast<std::size_t>(text.data() + text.size() - res.ptr));
  if (rest.empty()) {
    *out = value;
    return true;
  }
  if (rest.size() > 1) {
    if (error) *error = "trailing characters '" + std::string(rest) + "' after number";
    return false;
  }
  double scale;
  switch (std::tolower(static_cast<unsigned char>(rest[0]))) {
    case 'f': scale = 1e-15; break;
    case 'p': scale = 1e-12; break;
    case 'n': scale = 1e-9; break;
    case 'u': scale = 1e-6; break;
    case 'm': scale = 1e-3; break;
    case 'k': scale = 1e3; break;
    default:
      if (error) *error = std::string("unknown suffix '") + rest[0] + "'";
      return false;
  }
  *out = value * scale;
  return true;
}

}  // namespace tdram
