#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace defgraph {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structural problem that prevents an operation, e.g. a cycle during ordering.
class GraphError : public Error {
 public:
  using Error::Error;
};

// Enumeration refused because the joint table would be too large.
class GraphTooLargeError : public Error {
 public:
  using Error::Error;
};

// Evidence that has probability zero under the model.
class ContradictionError : public Error {
 public:
  using Error::Error;
};

// Scenario text that cannot be parsed. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace defgraph
