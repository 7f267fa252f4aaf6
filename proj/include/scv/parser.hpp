#pragma once

#include <stdexcept>
#include <string>

#include "scv/syntax.hpp"

namespace scv {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& msg, int line, int col)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": " + msg), line(line), col(col) {}
};

Program parse_program(const std::string& text);
Program parse_file(const std::string& path);

// Parse a single expression in the scope of the given label (no modules visible).
Ex parse_expr(const std::string& text, Sym label);

}  // namespace scv
