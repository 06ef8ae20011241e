#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "modred/errors.hpp"

namespace modred {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Continuous-time LTI system x' = Ax + Bu, y = Cx + Du.
///
/// n = 0 (pure static gain) is a first-class citizen: A is 0x0, B is 0xm,
/// C is px0 and the response is just D.
struct StateSpaceModel {
  Matrix A;  // n x n
  Matrix B;  // n x m
  Matrix C;  // p x n
  Matrix D;  // p x m

  Index n() const { return A.rows(); }
  Index m() const { return D.cols(); }
  Index p() const { return D.rows(); }

  static StateSpaceModel static_gain(Matrix gain) {
    StateSpaceModel sys;
    const Index p = gain.rows(), m = gain.cols();
    sys.A.resize(0, 0);
    sys.B.resize(0, m);
    sys.C.resize(p, 0);
    sys.D = std::move(gain);
    return sys;
  }
};

inline void validate(const StateSpaceModel& sys, const std::string& name = "system") {
  const Index n = sys.A.rows();
  if (sys.A.cols() != n)
    throw DimensionError(name + ": A must be square, got " +
                         std::to_string(sys.A.rows()) + "x" + std::to_string(sys.A.cols()));
  if (sys.B.rows() != n)
    throw DimensionError(name + ": B has " + std::to_string(sys.B.rows()) +
                         " rows, expected " + std::to_string(n));
  if (sys.C.cols() != n)
    throw DimensionError(name + ": C has " + std::to_string(sys.C.cols()) +
                         " cols, expected " + std::to_string(n));
  if (sys.D.rows() != sys.C.rows() || sys.D.cols() != sys.B.cols())
    throw DimensionError(name + ": D must be " + std::to_string(sys.C.rows()) + "x" +
                         std::to_string(sys.B.cols()) + ", got " +
                         std::to_string(sys.D.rows()) + "x" + std::to_string(sys.D.cols()));
  for (const Matrix* mat : {&sys.A, &sys.B, &sys.C, &sys.D}) {
    if (!mat->allFinite()) throw InvalidArgument(name + ": non-finite matrix entry");
  }
}

/// Strictly increasing, strictly positive frequency samples in rad/s.
struct FrequencyGrid {
  std::vector<double> omegas;

  std::size_t size() const { return omegas.size(); }
  double operator[](std::size_t i) const { return omegas[i]; }

  static FrequencyGrid logspace(double omega_min, double omega_max, std::size_t points) {
    if (!(omega_min > 0.0) || !(omega_max > omega_min))
      throw InvalidArgument("logspace: need 0 < omega_min < omega_max");
    if (points < 2) throw InvalidArgument("logspace: need at least 2 points");
    FrequencyGrid grid;
    grid.omegas.resize(points);
    const double l0 = std::log10(omega_min), l1 = std::log10(omega_max);
    for (std::size_t i = 0; i < points; ++i)
      grid.omegas[i] = std::pow(10.0, l0 + (l1 - l0) * double(i) / double(points - 1));
    grid.omegas.front() = omega_min;
    grid.omegas.back() = omega_max;
    return grid;
  }
};

inline void validate(const FrequencyGrid& grid) {
  if (grid.omegas.empty()) throw InvalidArgument("frequency grid is empty");
  double prev = 0.0;
  for (double w : grid.omegas) {
    if (!(w > prev) || !std::isfinite(w))
      throw InvalidArgument("frequency grid must be strictly increasing and positive");
    prev = w;
  }
}

/// Block-diagonal stacking of a list of systems; inputs and outputs concatenate.
inline StateSpaceModel blkdiag_assemble(const std::vector<StateSpaceModel>& models) {
  if (models.empty()) throw InvalidArgument("blkdiag_assemble: empty list");
  Index n = 0, m = 0, p = 0;
  for (const auto& sys : models) {
    validate(sys);
    n += sys.n();
    m += sys.m();
    p += sys.p();
  }
  StateSpaceModel out;
  out.A = Matrix::Zero(n, n);
  out.B = Matrix::Zero(n, m);
  out.C = Matrix::Zero(p, n);
  out.D = Matrix::Zero(p, m);
  Index in = 0, im = 0, ip = 0;
  for (const auto& sys : models) {
    out.A.block(in, in, sys.n(), sys.n()) = sys.A;
    out.B.block(in, im, sys.n(), sys.m()) = sys.B;
    out.C.block(ip, in, sys.p(), sys.n()) = sys.C;
    out.D.block(ip, im, sys.p(), sys.m()) = sys.D;
    in += sys.n();
    im += sys.m();
    ip += sys.p();
  }
  return out;
}

/// Realization of ghat - g (difference system). State dimension n_g + n_ghat.
inline StateSpaceModel parallel_diff(const StateSpaceModel& g, const StateSpaceModel& ghat) {
  validate(g, "g");
  validate(ghat, "ghat");
  if (g.m() != ghat.m() || g.p() != ghat.p())
    throw DimensionError("parallel_diff: I/O dimensions differ");
  StateSpaceModel out;
  const Index n = g.n() + ghat.n();
  out.A = Matrix::Zero(n, n);
  out.A.topLeftCorner(g.n(), g.n()) = g.A;
  out.A.bottomRightCorner(ghat.n(), ghat.n()) = ghat.A;
  out.B = Matrix::Zero(n, g.m());
  out.B.topRows(g.n()) = g.B;
  out.B.bottomRows(ghat.n()) = ghat.B;
  out.C = Matrix::Zero(g.p(), n);
  out.C.leftCols(g.n()) = -g.C;
  out.C.rightCols(ghat.n()) = ghat.C;
  out.D = ghat.D - g.D;
  return out;
}

/// Series connection second(first(u)): output of `first` feeds `second`.
inline StateSpaceModel series(const StateSpaceModel& first, const StateSpaceModel& second) {
  validate(first, "first");
  validate(second, "second");
  if (second.m() != first.p())
    throw DimensionError("series: inner dimensions differ");
  StateSpaceModel out;
  const Index n = first.n() + second.n();
  out.A = Matrix::Zero(n, n);
  out.A.topLeftCorner(first.n(), first.n()) = first.A;
  out.A.bottomRightCorner(second.n(), second.n()) = second.A;
  out.A.bottomLeftCorner(second.n(), first.n()) = second.B * first.C;
  out.B = Matrix::Zero(n, first.m());
  out.B.topRows(first.n()) = first.B;
  out.B.bottomRows(second.n()) = second.B * first.D;
  out.C = Matrix::Zero(second.p(), n);
  out.C.leftCols(first.n()) = second.D * first.C;
  out.C.rightCols(second.n()) = second.C;
  out.D = second.D * first.D;
  return out;
}

/// Largest singular value of a complex matrix.
inline double sigma_max(const ComplexMatrix& M) {
  if (M.rows() == 0 || M.cols() == 0) return 0.0;
  return M.jacobiSvd().singularValues()(0);
}

}  // namespace modred
