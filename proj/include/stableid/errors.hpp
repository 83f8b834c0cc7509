#pragma once

#include <stdexcept>
#include <string>

namespace stableid {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape mismatch between arguments.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Non-finite or otherwise unusable numeric input.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A value that is supposed to lie on a manifold (or satisfy a type invariant) does not.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

// An iterative solver ran out of iterations without meeting its tolerances.
class SolverFailure : public Error {
 public:
  using Error::Error;
};

// Armijo backtracking exceeded its trial cap.
class LineSearchFailure : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace stableid
