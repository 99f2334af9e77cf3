#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace icann {

/// Root of all library exceptions.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Failures of the numerical pipeline (tensor algebra, return mapping, training).
class NumericalError : public Error {
public:
  using Error::Error;
};

/// Bad user input: paths, files, configuration.
class InputError : public Error {
public:
  using Error::Error;
};

class NonPositiveDeterminant : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class SingularTensor : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class NotPositiveDefinite : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Argument of an exponential activation left the admissible range.
class ArgumentOverflow : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class NewtonDivergence : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class DegenerateFlow : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class UnboundedSurface : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class NonFiniteGradient : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class InvalidPath : public InputError {
public:
  using InputError::InputError;
};

class ValidationError : public InputError {
public:
  using InputError::InputError;
};

class ConfigError : public InputError {
public:
  using InputError::InputError;
};

class ParseError : public InputError {
public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : InputError(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace icann
