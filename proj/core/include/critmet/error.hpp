#pragma once

#include <stdexcept>
#include <string>

namespace critmet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside the domain where an operation is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Requested Hilbert-space dimension exceeds the configured budget.
class CapacityError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// An iterative method stopped before reaching its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_residual)
      : Error(what), best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

class DegenerateGroundState : public Error {
 public:
  using Error::Error;
};

/// The observable's expectation value does not respond to the parameter.
class InsensitiveObservable : public Error {
 public:
  using Error::Error;
};

/// A finite-difference step left the small-shift expansion regime.
class RegimeError : public Error {
 public:
  using Error::Error;
};

}  // namespace critmet
