#pragma once

#include <stdexcept>
#include <string>

namespace mixedsde {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument is outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A kernel or density was evaluated at a point where it diverges.
class SingularityError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A numerical procedure failed: factorization breakdown, quadrature
/// non-convergence, or a non-finite state in a recursion.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// An experiment plan or configuration is structurally invalid.
class PlanError : public Error {
 public:
  using Error::Error;
};

/// Interpolation was requested at a point not resolvable from the
/// available noise grid.
class UnsupportedPointError : public Error {
 public:
  using Error::Error;
};

/// A model coefficient returned a non-finite value; carries the point.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, double t, double x)
      : Error(what), t_(t), x_(x) {}
  double t() const noexcept { return t_; }
  double x() const noexcept { return x_; }

 private:
  double t_;
  double x_;
};

/// The closed-form moment bound does not apply for these parameters.
class BoundInapplicableError : public Error {
 public:
  using Error::Error;
};

/// A log-log fit was requested on degenerate data (zero error values).
class DegenerateFitError : public Error {
 public:
  using Error::Error;
};

}  // namespace mixedsde
