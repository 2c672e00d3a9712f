#pragma once

#include <stdexcept>
#include <string>

namespace varsel {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (CSV, JSON).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Arguments that violate a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An iterative solver exhausted its iteration budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown (non-finite values, degenerate data).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File system failure (unreadable input, unwritable output).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace varsel
