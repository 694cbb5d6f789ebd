#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace tamekit {

// Base of every error raised by the library. Each error names the violated
// precondition so callers (and the CLI) can report it verbatim.
class Error : public std::runtime_error {
 public:
  Error(std::string precondition, const std::string& detail)
      : std::runtime_error(precondition + ": " + detail),
        precondition_(std::move(precondition)) {}

  const std::string& precondition() const noexcept { return precondition_; }

 private:
  std::string precondition_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& detail) : Error("dimension_match", detail) {}
};

// A mathematical precondition failed (slit eigenvalue, degenerate form, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// An iterative routine did not reach its tolerance.
class ConvergenceError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Malformed input documents.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& detail) : Error("well_formed_input", detail) {}
};

}  // namespace tamekit
