#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "modred/freq_response.hpp"
#include "modred/stability.hpp"
#include "modred/state_space.hpp"

namespace modred {

struct HinfResult {
  double value = 0.0;
  double omega_peak = 0.0;  // 0 for a DC/static peak, +inf when D dominates
};

namespace detail {

// Successive golden-section maximization of f over [a, b]; stops once the
// bracket is tight or the value improvement drops below rel_tol.
template <typename F>
double golden_max(F&& f, double a, double b, double rel_tol, int max_iter,
                  double* arg_out) {
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  double best = std::max(f1, f2);
  for (int it = 0; it < max_iter; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
    const double cur = std::max(f1, f2);
    if (cur - best <= rel_tol * std::max(best, 1e-300) && it > 4) {
      best = std::max(best, cur);
      break;
    }
    best = std::max(best, cur);
  }
  if (arg_out) *arg_out = (f1 > f2) ? x1 : x2;
  return best;
}

}  // namespace detail

/// H-infinity norm by grid evaluation with local refinement around the grid
/// peaks; DC and the direct feedthrough are always checked as well.
inline HinfResult hinf_norm(const StateSpaceModel& sys, const FrequencyGrid& grid,
                            double refine_tol = 1e-4) {
  validate(sys);
  validate(grid);
  require_stable(sys, "hinf_norm");

  const FrequencyResponseEvaluator eval(sys);
  HinfResult result;
  result.value = sigma_max(sys.D.cast<Complex>());
  result.omega_peak = std::numeric_limits<double>::infinity();
  {
    const double dc = sigma_max(eval(0.0));
    if (dc > result.value) {
      result.value = dc;
      result.omega_peak = 0.0;
    }
  }
  if (sys.n() == 0) {
    result.omega_peak = 0.0;
    return result;
  }

  const std::size_t npts = grid.size();
  std::vector<double> mags(npts);
  for (std::size_t i = 0; i < npts; ++i) mags[i] = sigma_max(eval(grid[i]));

  // Local maxima of the sampled response, strongest first.
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < npts; ++i) {
    const bool up = (i == 0) || mags[i] >= mags[i - 1];
    const bool down = (i + 1 == npts) || mags[i] >= mags[i + 1];
    if (up && down) candidates.push_back(i);
  }
  std::sort(candidates.begin(), candidates.end(),
            [&](std::size_t a, std::size_t b) { return mags[a] > mags[b]; });
  if (candidates.size() > 5) candidates.resize(5);

  for (std::size_t ci : candidates) {
    const double wl = (ci == 0) ? grid[0] * 0.5 : grid[ci - 1];
    const double wr = (ci + 1 == npts) ? grid[npts - 1] * 2.0 : grid[ci + 1];
    double arg = grid[ci];
    const double peak = detail::golden_max(
        [&](double logw) { return sigma_max(eval(std::pow(10.0, logw))); },
        std::log10(wl), std::log10(wr), refine_tol, 80, &arg);
    if (peak > result.value) {
      result.value = peak;
      result.omega_peak = std::pow(10.0, arg);
    }
  }
  return result;
}

/// Exact-mode H-infinity norm: bisection on the level, deciding each level by
/// the presence of imaginary-axis eigenvalues of the associated Hamiltonian
/// matrix. Intended for moderate state dimension (the eigenproblem is 2n x 2n).
inline HinfResult hinf_norm_bisection(const StateSpaceModel& sys, double rel_tol = 1e-6) {
  validate(sys);
  require_stable(sys, "hinf_norm_bisection");
  const Index n = sys.n();
  const double sigma_d = sigma_max(sys.D.cast<Complex>());
  if (n == 0) return {sigma_d, 0.0};

  const FrequencyResponseEvaluator eval(sys);

  // Probe near the resonances of A plus a decade spread for a lower bound.
  const ComplexVector eigs = stability_report(sys).eigenvalues;
  std::vector<double> probes{0.0};
  for (Index i = 0; i < eigs.size(); ++i)
    if (std::abs(eigs(i).imag()) > 0) probes.push_back(std::abs(eigs(i).imag()));
  double wmax = 1.0;
  for (double w : probes) wmax = std::max(wmax, w);
  for (int i = -3; i <= 3; ++i) probes.push_back(wmax * std::pow(10.0, i));

  double lo = sigma_d;
  double omega_peak = std::numeric_limits<double>::infinity();
  for (double w : probes) {
    const double s = sigma_max(eval(w));
    if (s > lo) {
      lo = s;
      omega_peak = w;
    }
  }

  const auto has_imaginary_axis_eig = [&](double gamma) {
    const Matrix R = gamma * gamma * Matrix::Identity(sys.m(), sys.m()) -
                     sys.D.transpose() * sys.D;
    Eigen::LDLT<Matrix> ldlt(R);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return true;
    const Matrix Rinv_Dt_C = ldlt.solve(sys.D.transpose() * sys.C);
    const Matrix Rinv_Bt = ldlt.solve(sys.B.transpose());
    const Matrix Mblk = sys.A + sys.B * Rinv_Dt_C;
    Matrix H(2 * n, 2 * n);
    H.topLeftCorner(n, n) = Mblk;
    H.topRightCorner(n, n) = sys.B * Rinv_Bt;
    H.bottomLeftCorner(n, n) =
        -sys.C.transpose() * (sys.C + sys.D * Rinv_Dt_C);
    H.bottomRightCorner(n, n) = -Mblk.transpose();
    Eigen::EigenSolver<Matrix> es(H, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
      throw NumericalError("hinf_norm_bisection: Hamiltonian eigensolver failed");
    const double scale = H.cwiseAbs().maxCoeff();
    for (Index i = 0; i < es.eigenvalues().size(); ++i) {
      const Complex lam = es.eigenvalues()(i);
      if (std::abs(lam.real()) <= 1e-7 * std::max(scale, std::abs(lam))) return true;
    }
    return false;
  };

  double gamma_lo = lo * (1.0 + 1e-8) + 1e-300;
  double gamma_hi = std::max(gamma_lo * 2.0, 1e-290);
  int doublings = 0;
  while (has_imaginary_axis_eig(gamma_hi) && doublings++ < 80) gamma_hi *= 2.0;
  if (doublings >= 80)
    throw NumericalError("hinf_norm_bisection: no finite upper bracket found");
  while ((gamma_hi - gamma_lo) > rel_tol * gamma_hi) {
    const double mid = std::sqrt(gamma_lo * gamma_hi);
    if (has_imaginary_axis_eig(mid))
      gamma_lo = mid;
    else
      gamma_hi = mid;
  }
  return {gamma_hi, omega_peak};
}

}  // namespace modred
