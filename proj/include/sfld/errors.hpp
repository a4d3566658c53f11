#pragma once

#include <stdexcept>
#include <string>

namespace sfld {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A parameter violates a precondition (e.g. alpha <= 1, rho outside (-1,1)).
class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature failed to reach the requested tolerance.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// An integral against a Levy measure diverges (non-integrable tail).
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// sigma2 vanishes where the fast-layer formulas need 1/sigma2^2.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// The speed density is not normalizable on the requested domain.
class NonErgodicError : public Error {
 public:
  using Error::Error;
};

/// An iterative solve exhausted its budget without meeting tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// The discretized generator lost positivity (suggests a finer grid).
class MonotonicityError : public Error {
 public:
  using Error::Error;
};

/// A requested evaluation is outside the feasible region (e.g. H0 < V).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// The simulated state became non-finite.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, double last_valid_time)
      : Error(what), last_valid_time(last_valid_time) {}
  double last_valid_time;
};

/// The time step does not resolve the fast scale (dt > epsilon^alpha).
class StiffnessError : public Error {
 public:
  using Error::Error;
};

/// The HJ time stepping blew past the instability detector.
class CflError : public Error {
 public:
  using Error::Error;
};

/// A lookup left the tabulated (x, p) or q range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Input samples fail a required convexity certificate.
class ConvexityError : public Error {
 public:
  using Error::Error;
};

/// Config parsing/validation failure; message names the offending field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace sfld
