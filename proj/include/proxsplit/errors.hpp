#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace proxsplit {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A vector or operator was used with the wrong dimension.
class DimensionError : public Error {
 public:
  DimensionError(const std::string& where, std::size_t expected, std::size_t actual)
      : Error(where + ": expected dimension " + std::to_string(expected) +
              ", got " + std::to_string(actual)),
        expected(expected),
        actual(actual) {}
  std::size_t expected;
  std::size_t actual;
};

// Mismatched block structure or weights between two block vectors.
class StructureError : public Error {
 public:
  using Error::Error;
};

// An API precondition was violated (e.g. grad() on a nonsmooth function).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Power iteration did not settle within the iteration budget.
class NormEstimationError : public Error {
 public:
  NormEstimationError(double last_rayleigh, int iterations)
      : Error("operator norm estimation did not converge after " +
              std::to_string(iterations) +
              " iterations (last Rayleigh quotient " +
              std::to_string(last_rayleigh) + ")"),
        last_rayleigh(last_rayleigh),
        iterations(iterations) {}
  double last_rayleigh;
  int iterations;
};

// A linear system that must be solvable turned out singular,
// e.g. projection onto an inconsistent affine set.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

// prox of an infimal postcomposition requested for a function kind
// that does not reduce to a linear solve.
class UnsupportedPostcomposition : public Error {
 public:
  using Error::Error;
};

// An iterate left the realm of finite floating point numbers.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(int iteration)
      : Error("iterate became non-finite at iteration " + std::to_string(iteration)),
        iteration(iteration) {}
  int iteration;
};

// A required operator norm bound was not available.
class MissingNormBound : public Error {
 public:
  explicit MissingNormBound(const std::string& op_label)
      : Error("no certified norm bound for operator '" + op_label + "'"),
        op_label(op_label) {}
  std::string op_label;
};

// The independent ground-truth solver failed to certify its own answer.
class OracleError : public Error {
 public:
  using Error::Error;
};

}  // namespace proxsplit
