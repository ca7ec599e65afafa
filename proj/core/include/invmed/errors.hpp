#pragma once

#include <stdexcept>
#include <string>

namespace invmed {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid argument or precondition violation (bad grid size, negative
/// coefficient, mismatched grids, ...).
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

/// The assembled operator is singular (pure-Neumann Laplacian with zero
/// coefficient) or a factorization failed.
class SingularOperatorError : public Error {
 public:
  using Error::Error;
};

/// An iterative method failed to reach its tolerance.  Carries the last
/// residual (linear solvers) or the empirical contraction ratio
/// (fixed-point iterations) as evidence.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double evidence)
      : Error(what), evidence_(evidence) {}
  /// Final relative residual, or rho_hat for fixed-point iterations.
  double evidence() const { return evidence_; }

 private:
  double evidence_ = 0.0;
};

/// A probing weight |eta_x|_W fell below the guard threshold and cannot be
/// used as a divisor.
class DegenerateWeightError : public Error {
 public:
  using Error::Error;
};

/// Configuration parsing failure; carries the offending key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string key)
      : Error(what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// File-system / serialization failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace invmed
