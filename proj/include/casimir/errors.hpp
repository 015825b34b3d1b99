#pragma once

#include <stdexcept>
#include <string>

namespace casimir {

// Base of everything the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (p < 0, tau <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Operation not defined for this model or stack variant.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Matrix or amplitude inversion with a vanishing pivot.
class SingularError : public Error {
 public:
  using Error::Error;
};

// Two-port composition with a resonant denominator 1 - rbar_A r_B ~ 0.
class DegenerateCompositionError : public Error {
 public:
  using Error::Error;
};

// Roundtrip gain |r1 r2| > 1 somewhere on the imaginary axis.
class UnstableCavityError : public Error {
 public:
  using Error::Error;
};

// Airy function evaluated at an exact resonance of a lossless cavity.
class DivergentResonanceError : public Error {
 public:
  using Error::Error;
};

// Numerical procedure did not reach the requested accuracy. The best
// available estimate is kept so callers can still report it.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double best_estimate, double error_estimate)
      : Error(what), best_estimate_(best_estimate), error_estimate_(error_estimate) {}

  double best_estimate() const noexcept { return best_estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double best_estimate_;
  double error_estimate_;
};

}  // namespace casimir
