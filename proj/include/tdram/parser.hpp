#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "tdram/circuit.hpp"

namespace tdram {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int col, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ", col " + std::to_string(col) +
                           ": " + message),
        line_(line),
        col_(col) {}

  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

/// Parses the line-oriented netlist grammar:
///   M<name> <drain> <gate> <source> <n|p> chirality=<n>,<m> [tubes=K] [vth=<volts>]
///   C<name> <n+> <n-> <value>
///   V<name> <n+> <n-> pwl(<t> <v> ...) | dc <v>
///   S<name> <n+> <n-> ctrl=<sourcename> ron=<ohms> roff=<ohms> [thresh=<volts>]
///   * comment lines; .title, .temp, .end directives
/// Element letters are case-insensitive and names are folded to lower case.
/// Numbers accept engineering suffixes f/p/n/u/m/k.
/// Throws ParseError with position on any lexical or semantic violation.
Circuit parse_netlist(std::string_view text);

}  // namespace tdram
