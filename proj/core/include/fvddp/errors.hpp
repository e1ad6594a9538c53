#pragma once

#include <stdexcept>
#include <string>

namespace fvddp {

/// Alternating-sum evaluation left the admissible range or hit coincident rates.
class NumericalInstability : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An exact computation would exceed the configured work budget; use the
/// Monte Carlo variant instead.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An observation has zero likelihood under every mixture component.
class ModelMisspecification : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A truncated series did not reach the requested tolerance.
class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data or configuration.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fvddp
