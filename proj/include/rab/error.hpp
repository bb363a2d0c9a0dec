#pragma once

#include <stdexcept>
#include <string>

namespace rab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree (mismatched dimensions, foreign bases).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain of an operation (r <= 0, no root, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical invariant was violated (trace drift, positivity, Hermiticity).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A propagated state violated a physicality limit.
class PhysicalityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The steady-state space of a Liouvillian has dimension above one.
class DegenerateSteadyStateError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Invalid user configuration. Carries an optional source position.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = -1, int column = -1)
      : Error(line >= 0 ? "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what
                        : what),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace rab
