#pragma once

#include <stdexcept>
#include <string>

namespace fkcap {

// Violated precondition: wrong shape, bad flag value, out-of-range parameter.
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Input document failed to parse or validate; the message names the offending
// field (e.g. "kraus[2] row 1").
struct ParseError : DomainError {
  using DomainError::DomainError;
};

// A matrix that had to be positive definite was singular at working precision.
class SingularError : public std::runtime_error {
 public:
  SingularError(const std::string& what, double min_eig)
      : std::runtime_error(what), min_eigenvalue(min_eig) {}
  double min_eigenvalue;
};

// An iterative solver exhausted its budget; carries the last residual seen.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double res)
      : std::runtime_error(what), residual(res) {}
  double residual;
};

}  // namespace fkcap
