#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace incomefp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the support or the valid parameter region.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The upper branch decays too slowly for the density to be normalized.
class TailDivergenceError : public Error {
 public:
  using Error::Error;
};

/// The Euler-Maruyama step violates the drift stability bound.
class StabilityError : public Error {
 public:
  using Error::Error;
};

/// Segmentation or regression could not produce a usable estimate.
class EstimationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text; carries the 1-based line and column of the fault.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace incomefp
