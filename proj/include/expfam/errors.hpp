#pragma once

#include <stdexcept>
#include <string>

namespace expfam {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Violated precondition or type invariant (dimension mismatch, non-finite
/// input, unnormalized weights where a convex combination is required, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// An operation was asked to act on a measure family it does not support.
class UnsupportedMeasureError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : Error(what), residual(residual), iterations(iterations) {}
  double residual;
  int iterations;
};

/// Ensemble statistics requested from fewer than two samples.
class InsufficientSamplesError : public ContractError {
 public:
  using ContractError::ContractError;
};

/// Singular covariance where an inverse root is required and no ridge is set.
class SingularCovarianceError : public Error {
 public:
  SingularCovarianceError(const std::string& what, int rank, int dim)
      : Error(what), rank(rank), dim(dim) {}
  int rank;
  int dim;
};

/// Oracle evaluated its target function outside the finite domain.
class OracleDomainError : public Error {
 public:
  using Error::Error;
};

/// Oracle asked to run at a scale it is not designed for (e.g. grid in D > 2).
class OracleScaleError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace expfam
