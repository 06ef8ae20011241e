#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "modred/state_space.hpp"

namespace modred {

// Stability margin below which an eigenvalue real part no longer counts as
// strictly negative. Scaled with the spectral radius so large fast systems
// and slow small ones are treated alike.
inline double stability_tolerance(const ComplexVector& eigenvalues) {
  double radius = 0.0;
  for (Index i = 0; i < eigenvalues.size(); ++i)
    radius = std::max(radius, std::abs(eigenvalues(i)));
  return 1e-9 * std::max(1.0, radius);
}

struct StabilityReport {
  bool stable = true;          // every Re(lambda) < -tol
  double max_real_part = -std::numeric_limits<double>::infinity();
  double tol = 0.0;
  Index marginal_count = 0;    // eigenvalues with Re in (-tol, 0]
  ComplexVector eigenvalues;
};

inline StabilityReport stability_report(const Matrix& A) {
  StabilityReport rep;
  if (A.rows() == 0) return rep;
  Eigen::EigenSolver<Matrix> solver(A, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw NumericalError("stability_report: eigenvalue solver failed");
  rep.eigenvalues = solver.eigenvalues();
  rep.tol = stability_tolerance(rep.eigenvalues);
  for (Index i = 0; i < rep.eigenvalues.size(); ++i) {
    const double re = rep.eigenvalues(i).real();
    rep.max_real_part = std::max(rep.max_real_part, re);
    if (re >= -rep.tol) rep.stable = false;
    if (re > -rep.tol && re <= 0.0) ++rep.marginal_count;
  }
  return rep;
}

inline StabilityReport stability_report(const StateSpaceModel& sys) {
  validate(sys);
  return stability_report(sys.A);
}

/// True iff all eigenvalues of A lie strictly left of -tol_stab.
/// Marginal eigenvalues (real part within tolerance of zero) count as
/// unstable.
inline bool is_stable(const StateSpaceModel& sys) { return stability_report(sys).stable; }

inline void require_stable(const StateSpaceModel& sys, const std::string& who) {
  const StabilityReport rep = stability_report(sys);
  if (!rep.stable)
    throw UnstableSystemError(who + ": system is not stable (max Re(eig) = " +
                                  std::to_string(rep.max_real_part) + ")",
                              rep.max_real_part);
}

}  // namespace modred
