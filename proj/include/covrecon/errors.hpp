#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace covrecon {

// Root of every error raised by the library. The CLI maps IoError and
// ParseError to exit code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates a structural precondition (asymmetry, bad dimensions, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Smallest eigenvalue is below the PSD tolerance.
class NotPsdError : public ValidationError {
 public:
  NotPsdError(const std::string& what, double min_eigenvalue)
      : ValidationError(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

// A zero or negative variance makes the correlation decomposition undefined.
class DegenerateVarianceError : public Error {
 public:
  using Error::Error;
};

// The requested target condition number is not below the current one.
class NoOpRequestError : public Error {
 public:
  using Error::Error;
};

// kappa_max <= 1, alpha <= 0, negative shifts and similar.
class InvalidTargetError : public Error {
 public:
  using Error::Error;
};

class InvalidParamsError : public Error {
 public:
  using Error::Error;
};

class InsufficientSamplesError : public Error {
 public:
  using Error::Error;
};

class NumericalBreakdownError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed CSV. line/column are 1-based; column 0 means "whole line".
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace covrecon
