#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "modred/state_space.hpp"

namespace modred {

struct WeightFitResult {
  StateSpaceModel weight;     // stable, minimum-phase, SISO
  double max_log10_error = 0; // worst log-magnitude deviation of the raw fit
  double kappa = 1.0;         // |w(iw)| >= 1/(kappa * profile(w)) on the grid
  bool warning = false;       // raw fit error above threshold
};

namespace detail {

// w(s) = g * prod (s/z_i + 1) / (s/p_i + 1), all z_i, p_i > 0.
struct SectionParams {
  double log_g = 0.0;
  Vector log_z, log_p;
};

inline double shape_log_mag(const SectionParams& sp, double omega) {
  double v = 0.0;
  for (Index i = 0; i < sp.log_z.size(); ++i) {
    const double u = omega * std::exp(-sp.log_z(i));
    v += 0.5 * std::log1p(u * u);
  }
  for (Index i = 0; i < sp.log_p.size(); ++i) {
    const double u = omega * std::exp(-sp.log_p(i));
    v -= 0.5 * std::log1p(u * u);
  }
  return v;
}

inline StateSpaceModel realize_sections(const SectionParams& sp) {
  const Index q = sp.log_z.size();
  StateSpaceModel w = StateSpaceModel::static_gain(Matrix::Constant(1, 1, std::exp(sp.log_g)));
  for (Index i = 0; i < q; ++i) {
    const double z = std::exp(sp.log_z(i));
    const double p = std::exp(sp.log_p(i));
    // (s/z + 1)/(s/p + 1) = (p/z) (s + z)/(s + p)
    StateSpaceModel sec;
    sec.A = Matrix::Constant(1, 1, -p);
    sec.B = Matrix::Constant(1, 1, 1.0);
    sec.C = Matrix::Constant(1, 1, (p / z) * (z - p));
    sec.D = Matrix::Constant(1, 1, p / z);
    w = series(w, sec);
  }
  return w;
}

}  // namespace detail

/// Fits a stable minimum-phase scalar weight with |w(iw)| ~ 1/profile(w) on
/// the grid. Levenberg-Marquardt on the log magnitude over first-order
/// sections with free (log-parameterized) poles and zeros; the gain is closed
/// form. The returned weight is rescaled so that |w(iw)| >= 1/profile(w) at
/// every grid point.
inline WeightFitResult fit_rational_weight(const Vector& profile, const FrequencyGrid& grid,
                                           Index order = 8) {
  validate(grid);
  const Index npts = static_cast<Index>(grid.size());
  if (profile.size() != npts)
    throw DimensionError("fit_rational_weight: profile length must match grid");
  for (Index i = 0; i < npts; ++i)
    if (!(profile(i) > 0.0) || !std::isfinite(profile(i)))
      throw InvalidArgument("fit_rational_weight: profile must be strictly positive");
  if (order < 0) throw InvalidArgument("fit_rational_weight: negative order");

  Vector log_target(npts);
  for (Index i = 0; i < npts; ++i) log_target(i) = -std::log(profile(i));

  const double spread = log_target.maxCoeff() - log_target.minCoeff();
  if (order == 0 || spread < 1e-9) {
    WeightFitResult res;
    res.weight = StateSpaceModel::static_gain(
        Matrix::Constant(1, 1, std::exp(log_target.maxCoeff())));
    res.max_log10_error = spread / std::log(10.0);
    return res;
  }

  const double lw_min = std::log(grid[0]), lw_max = std::log(grid[npts - 1]);
  const double lo = lw_min - std::log(100.0), hi = lw_max + std::log(100.0);

  detail::SectionParams sp;
  sp.log_z.resize(order);
  sp.log_p.resize(order);
  for (Index i = 0; i < order; ++i) {
    const double t = (order == 1) ? 0.5 : double(i) / double(order - 1);
    sp.log_z(i) = lw_min + t * (lw_max - lw_min);
    sp.log_p(i) = sp.log_z(i) + 0.5 * (lw_max - lw_min) / double(order);
  }

  auto residuals = [&](const detail::SectionParams& q, Vector& r) {
    double mean = 0.0;
    for (Index k = 0; k < npts; ++k) {
      r(k) = detail::shape_log_mag(q, grid[k]) - log_target(k);
      mean += r(k);
    }
    mean /= double(npts);
    r.array() -= mean;           // optimal gain folded out
    return -mean;                // log g
  };

  Vector r(npts), r_try(npts);
  sp.log_g = residuals(sp, r);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  Eigen::MatrixXd J(npts, 2 * order);
  for (int iter = 0; iter < 200; ++iter) {
    for (Index k = 0; k < npts; ++k) {
      const double w = grid[k];
      for (Index i = 0; i < order; ++i) {
        const double uz = std::pow(w * std::exp(-sp.log_z(i)), 2);
        const double up = std::pow(w * std::exp(-sp.log_p(i)), 2);
        J(k, i) = -uz / (1.0 + uz);
        J(k, order + i) = up / (1.0 + up);
      }
    }
    // center columns: the gain absorbs any constant shift
    for (Index c = 0; c < 2 * order; ++c) J.col(c).array() -= J.col(c).mean();

    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Vector g = J.transpose() * r;
    bool accepted = false;
    for (int tries = 0; tries < 12; ++tries) {
      Eigen::MatrixXd M = JtJ;
      M.diagonal().array() += lambda * (JtJ.diagonal().array().maxCoeff() + 1e-12);
      const Vector step = M.ldlt().solve(-g);
      detail::SectionParams trial = sp;
      for (Index i = 0; i < order; ++i) {
        trial.log_z(i) = std::clamp(sp.log_z(i) + step(i), lo, hi);
        trial.log_p(i) = std::clamp(sp.log_p(i) + step(order + i), lo, hi);
      }
      trial.log_g = residuals(trial, r_try);
      const double trial_cost = r_try.squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        sp = trial;
        r = r_try;
        cost = trial_cost;
        lambda = std::max(lambda * 0.4, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 4.0;
    }
    if (!accepted || g.norm() < 1e-10 * std::sqrt(cost + 1e-30)) break;
  }

  WeightFitResult res;
  res.max_log10_error = r.cwiseAbs().maxCoeff() / std::log(10.0);
  res.warning = res.max_log10_error > std::log10(3.0);

  // Lift the gain so the weight never undershoots the target.
  double worst = 0.0;
  for (Index k = 0; k < npts; ++k)
    worst = std::max(worst, log_target(k) - (detail::shape_log_mag(sp, grid[k]) + sp.log_g));
  sp.log_g += std::max(worst, 0.0);
  res.kappa = 1.0;
  res.weight = detail::realize_sections(sp);
  return res;
}

}  // namespace modred
