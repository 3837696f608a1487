#pragma once

#include <stdexcept>
#include <string>

namespace udforest {

// Raised while reading a text input; `line` is 1-based, 0 when unknown.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& message)
      : std::runtime_error(message), line(0) {}
  ParseError(const std::string& message, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + message),
        line(line) {}
  int line;
};

// Raised when a structural constraint is violated (tree shape, index
// ranges, record schema).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace udforest
