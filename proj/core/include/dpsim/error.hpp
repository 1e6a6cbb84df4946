// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dpsim {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A caller-supplied value violates an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Square root of a negative argument while evaluating a surface.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Corrupt, truncated or otherwise unusable data (files, PSFs).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Every ray from an object point was lost before reaching a sub-pixel.
class VignettedError : public DataError {
 public:
  using DataError::DataError;
};

/// Numerical failure such as NaN loss or a degenerate prediction.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace dpsim
