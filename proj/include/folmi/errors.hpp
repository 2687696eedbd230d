#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace folmi {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent user input (config files, CLI arguments).
struct ConfigError : Error {
  using Error::Error;
};

/// Shape mismatch or structurally invalid matrix argument.
struct DimensionError : Error {
  using Error::Error;
};

/// Iteration caps, non-convergence, singular pivots, series divergence.
struct NumericalError : Error {
  using Error::Error;
};

/// Evaluation outside a function's domain (e.g. division by zero).
struct DomainError : Error {
  using Error::Error;
};

/// Syntax error with a position into the offending source text.
struct ParseError : Error {
  std::size_t position;
  ParseError(const std::string& msg, std::size_t pos)
      : Error(msg + " at position " + std::to_string(pos)), position(pos) {}
};

}  // namespace folmi
