#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace salab {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed arguments: dimension mismatch, out-of-range parameters, bad ranges.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A model (MDP, chain, features) that violates its structural invariants.
class InvalidModel : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// The operation's documented precondition does not hold (e.g. non-ergodic chain).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Floating-point trouble: non-finite iterates, iteration caps, degenerate fits.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what, std::optional<std::size_t> step = std::nullopt)
      : Error(what), step_(step) {}

  // Iteration index at which the problem was detected, when meaningful.
  std::optional<std::size_t> step() const { return step_; }

 private:
  std::optional<std::size_t> step_;
};

class NoConvergence : public NumericError {
 public:
  using NumericError::NumericError;
};

class DegenerateFit : public NumericError {
 public:
  using NumericError::NumericError;
};

class NotPositiveDefinite : public NumericError {
 public:
  using NumericError::NumericError;
};

// A bound was evaluated outside the regime in which it was derived.
// Carries both sides of the violated inequality `lhs <= rhs`.
class PremiseViolation : public Error {
 public:
  PremiseViolation(const std::string& what, double lhs, double rhs)
      : Error(what), lhs_(lhs), rhs_(rhs) {}

  double lhs() const { return lhs_; }
  double rhs() const { return rhs_; }

 private:
  double lhs_;
  double rhs_;
};

class EnumerationCapExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace salab
