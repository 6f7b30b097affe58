#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace minacc {

/// Base of every error the library throws. Callers that only care about
/// "the inputs were bad" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed WDBC text. `line()` is 1-based; 0 means the input as a whole
/// (e.g. empty file).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace minacc
