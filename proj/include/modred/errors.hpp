#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace modred {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Inconsistent matrix or signal dimensions.
class DimensionError : public Error {
  using Error::Error;
};

/// Invalid argument values (non-finite entries, bad grids, out-of-range orders).
class InvalidArgument : public Error {
  using Error::Error;
};

/// An operation that requires a stable system received an unstable one.
class UnstableSystemError : public Error {
 public:
  UnstableSystemError(const std::string& what, double max_real_part)
      : Error(what), max_real_part(max_real_part) {}
  double max_real_part;
};

/// Resolvent (iw*I - A) is singular or nearly singular at the requested
/// frequency; carries the offending eigenvalue.
class SingularResolventError : public Error {
 public:
  SingularResolventError(const std::string& what, double omega,
                         std::complex<double> eigenvalue)
      : Error(what), omega(omega), eigenvalue(eigenvalue) {}
  double omega;
  std::complex<double> eigenvalue;
};

/// The algebraic loop of an interconnection is (numerically) singular.
class IllPosedError : public Error {
 public:
  IllPosedError(const std::string& what, double condition_number)
      : Error(what), condition_number(condition_number) {}
  double condition_number;
};

/// A numerical routine failed to reach its accuracy target.
class NumericalError : public Error {
  using Error::Error;
};

}  // namespace modred
