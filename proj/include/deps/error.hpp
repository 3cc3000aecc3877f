#pragma once

#include <stdexcept>
#include <string>

namespace deps {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid distribution parameters (non-positive or non-finite).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A value fell outside the support an operation requires.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A point estimate was requested for a task that has no data.
class UndefinedEstimateError : public Error {
 public:
  using Error::Error;
};

/// A sample is too small or has no spread.
class DegenerateSampleError : public Error {
 public:
  using Error::Error;
};

/// Sample variance too large for any beta distribution to match.
class MomentInfeasibleError : public Error {
 public:
  using Error::Error;
};

/// An operation was called outside its precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent experiment or allocation configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data that parsed but is not acceptable (labels, duplicates, empty).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : ValidationError(what + " (line " + std::to_string(line) + ")"), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Gold-standard counts leave a decision prior undefined.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

}  // namespace deps
