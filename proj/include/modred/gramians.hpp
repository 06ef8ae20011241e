#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "modred/stability.hpp"
#include "modred/state_space.hpp"

namespace modred {

/// Solves A X + X A^T + Q = 0 for stable A and symmetric Q.
///
/// Bartels-Stewart scheme: one Schur reduction of A (complex, so the
/// back-substitution runs over a strictly triangular factor), then one
/// triangular solve per column. The residual is verified before returning.
inline Matrix lyapunov_solve(const Matrix& A, const Matrix& Q,
                             double residual_tol = 1e-8) {
  const Index n = A.rows();
  if (A.cols() != n) throw DimensionError("lyapunov_solve: A must be square");
  if (Q.rows() != n || Q.cols() != n)
    throw DimensionError("lyapunov_solve: Q must match A");
  if (n == 0) return Matrix(0, 0);
  if (!((Q - Q.transpose()).cwiseAbs().maxCoeff() <=
        1e-10 * std::max(1.0, Q.cwiseAbs().maxCoeff())))
    throw InvalidArgument("lyapunov_solve: Q must be symmetric");
  Eigen::ComplexSchur<Matrix> schur(A);
  if (schur.info() != Eigen::Success)
    throw NumericalError("lyapunov_solve: Schur decomposition failed");
  const ComplexMatrix& T = schur.matrixT();
  const ComplexMatrix& U = schur.matrixU();

  {
    // Eigenvalues come free on the Schur diagonal.
    const ComplexVector eigs = T.diagonal();
    const double tol = stability_tolerance(eigs);
    const double max_re = eigs.real().maxCoeff();
    if (max_re >= -tol)
      throw UnstableSystemError("lyapunov_solve: A is not stable (max Re(eig) = " +
                                    std::to_string(max_re) + ")",
                                max_re);
  }

  // Transformed equation: T Y + Y T^H = C with C = -U^H Q U.
  ComplexMatrix C = -(U.adjoint() * Q * U);
  ComplexMatrix Y(n, n);
  ComplexMatrix L = T;  // L = T + conj(T(j,j)) I, diagonal patched per column
  for (Index j = n - 1; j >= 0; --j) {
    ComplexVector rhs = C.col(j);
    if (j + 1 < n)
      rhs.noalias() -= Y.rightCols(n - j - 1) * T.row(j).tail(n - j - 1).adjoint();
    L.diagonal() = T.diagonal().array() + std::conj(T(j, j));
    Y.col(j) = L.triangularView<Eigen::Upper>().solve(rhs);
  }

  Matrix X = (U * Y * U.adjoint()).real();
  X = 0.5 * (X + X.transpose()).eval();

  const double residual = (A * X + X * A.transpose() + Q).norm();
  if (!(residual <= residual_tol * std::max(1.0, Q.norm())))
    throw NumericalError("lyapunov_solve: residual " + std::to_string(residual) +
                         " exceeds tolerance");
  return X;
}

struct GramianPair {
  Matrix P;  // controllability
  Matrix Q;  // observability
};

/// Controllability and observability Gramians of a stable system.
inline GramianPair gramians(const StateSpaceModel& sys) {
  validate(sys);
  require_stable(sys, "gramians");
  GramianPair g;
  g.P = lyapunov_solve(sys.A, sys.B * sys.B.transpose());
  g.Q = lyapunov_solve(sys.A.transpose(), sys.C.transpose() * sys.C);
  return g;
}

/// Symmetric PSD factor F with F F^T = S; tiny negative eigenvalues from
/// roundoff are clamped to zero.
inline Matrix psd_factor(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  if (es.info() != Eigen::Success)
    throw NumericalError("psd_factor: eigendecomposition failed");
  Vector lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.cwiseSqrt().asDiagonal();
}

/// Hankel singular values, nonincreasing and clamped at zero.
inline Vector hankel_singular_values(const StateSpaceModel& sys) {
  const GramianPair g = gramians(sys);
  if (sys.n() == 0) return Vector(0);
  const Matrix Lp = psd_factor(g.P);
  const Matrix Lq = psd_factor(g.Q);
  return Eigen::JacobiSVD<Matrix>(Lq.transpose() * Lp).singularValues().cwiseMax(0.0);
}

}  // namespace modred
