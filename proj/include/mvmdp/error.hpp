#pragma once

#include <stdexcept>
#include <string>

namespace mvmdp {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad dimensions, invalid distributions, out-of-range values.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A policy selects an action that is not allowed at some state.
class FeasibilityError : public ValidationError {
 public:
  FeasibilityError(int state, int action, const std::string& what)
      : ValidationError(what), state_(state), action_(action) {}

  int state() const noexcept { return state_; }
  int action() const noexcept { return action_; }

 private:
  int state_;
  int action_;
};

/// Model or policy file could not be parsed.
class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// The induced chain cannot be evaluated (reducible chain, inconsistent gain).
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// A solver hit an iterate it cannot evaluate or otherwise could not proceed.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// File system failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mvmdp
