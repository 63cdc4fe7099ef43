#pragma once

#include <stdexcept>

namespace olqr {

// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inputs have inconsistent or invalid dimensions.
struct DimensionMismatch : Error {
  using Error::Error;
};

// An iterative solver exhausted its iteration budget before reaching tolerance.
struct NonConvergence : Error {
  using Error::Error;
};

// An inner linear system (e.g. R + B^T P B) is numerically singular.
struct SingularInnerMatrix : Error {
  using Error::Error;
};

// The closed loop is unstable, so the requested infinite-horizon quantity
// does not exist.
struct UnstableController : Error {
  using Error::Error;
};

// A scalar bound lies outside its admissible range.
struct InvalidBound : Error {
  using Error::Error;
};

// The horizon is too short for the requested warm-up schedule.
struct HorizonTooShort : Error {
  using Error::Error;
};

// The scalar Riccati equation has no positive root.
struct NoPositiveRoot : Error {
  using Error::Error;
};

// A constructed object violates one of its documented invariants.
struct InvariantViolation : Error {
  using Error::Error;
};

// State or cost crossed the numeric overflow guard.
struct NumericOverflow : Error {
  using Error::Error;
};

// Malformed experiment configuration.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace olqr
