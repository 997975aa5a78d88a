#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace memliou {

// Config/input problems: bad dimensions, non-hermitian input where hermitian is
// required, malformed state specs. CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
  std::string field;
  ConfigError(std::string field_, const std::string& msg)
      : std::runtime_error(field_.empty() ? msg : field_ + ": " + msg),
        field(std::move(field_)) {}
};

// Solver-quality failures: eigensolver residuals out of tolerance, broken
// structural invariants (trace leakage, rank deficiencies). Exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Resolvent evaluation too close to a pole of the restricted propagator.
// Carries the offending frequency and the condition estimate.
struct NearPoleError : NumericalError {
  std::complex<double> z;
  double condition;
  NearPoleError(std::complex<double> z_, double condition_, const std::string& what_)
      : NumericalError(what_), z(z_), condition(condition_) {}
};

}  // namespace memliou
