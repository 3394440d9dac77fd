#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nlmc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands live on state spaces of different sizes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A vector failed the probability-vector checks beyond rounding tolerance.
class DistributionError : public Error {
 public:
  using Error::Error;
};

/// A configured size cap (grid points, pair evaluations) would be exceeded.
class CapError : public Error {
 public:
  CapError(const std::string& what, std::size_t cap)
      : Error(what + " (cap " + std::to_string(cap) + ")"), cap_(cap) {}
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t cap_;
};

/// Kernel does not define a transition kernel for every law.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, std::vector<std::string> violations)
      : Error(what), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Contraction hypotheses (lambda2 <= alpha2) are not certified.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

/// Bad arguments supplied by a caller (out-of-range parameters, bad flags).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Text input could not be parsed.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
        line_(line),
        column_(column) {}
  /// Structural error without a source position (line and column are 0).
  explicit ParseError(const std::string& what) : Error(what), line_(0), column_(0) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace nlmc
