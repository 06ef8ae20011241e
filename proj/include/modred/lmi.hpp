#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "modred/state_space.hpp"

namespace modred {

namespace detail {

// Real symmetric embedding [[Re, -Im], [Im, Re]] of a Hermitian matrix;
// eigenvalues are preserved (with doubled multiplicity) and an embedded
// eigenvector [x; y] maps back to the complex eigenvector x + iy.
inline Matrix hermitian_embedding(const ComplexMatrix& F) {
  const Index n = F.rows();
  Matrix E(2 * n, 2 * n);
  E.topLeftCorner(n, n) = F.real();
  E.topRightCorner(n, n) = -F.imag();
  E.bottomLeftCorner(n, n) = F.imag();
  E.bottomRightCorner(n, n) = F.real();
  return E;
}

struct MinEig {
  double value;
  ComplexVector vector;
};

inline MinEig min_eig_hermitian(const ComplexMatrix& F) {
  const Index n = F.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_embedding(F));
  if (es.info() != Eigen::Success)
    throw NumericalError("min_eig_hermitian: eigensolver failed");
  MinEig out;
  out.value = es.eigenvalues()(0);
  const Vector v = es.eigenvectors().col(0);
  out.vector = v.head(n) + Complex(0, 1) * v.tail(n);
  out.vector.normalize();
  return out;
}

inline double min_eig_value(const ComplexMatrix& F) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_embedding(F),
                                           Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalError("min_eig_hermitian: eigensolver failed");
  return es.eigenvalues()(0);
}

}  // namespace detail

/// Hermitian matrix family F(d) = F0 + sum_i d_i * terms[i] with d_i > 0.
struct AffineHermitianFamily {
  ComplexMatrix F0;
  std::vector<ComplexMatrix> terms;

  ComplexMatrix assemble(const Vector& d) const {
    ComplexMatrix F = F0;
    for (std::size_t i = 0; i < terms.size(); ++i) F += d(static_cast<Index>(i)) * terms[i];
    return F;
  }
};

struct InnerMaxOptions {
  int max_iterations = 60;      // per smoothing stage
  int smoothing_stages = 4;
  double log10_bracket = 30.0;  // d confined to [10^-b, 10^b]
  double step_tol = 1e-8;       // ascent stops below this step (in ln d)
};

struct InnerMaxResult {
  double lambda_min = -std::numeric_limits<double>::infinity();
  Vector d;
};

namespace detail {

// Maximizes lambda_min(F(d)) over d > 0. lambda_min is concave in d but
// nonsmooth where eigenvalues cross, so the ascent runs on the smoothed
// surrogate f_mu = -mu log tr exp(-F/mu) (concave, smooth, within
// mu*log(size) of lambda_min) with a decreasing-mu continuation, followed by
// an exact golden-section polish per coordinate (each coordinate section of
// the true objective is unimodal).
class LambdaMinMaximizer {
 public:
  LambdaMinMaximizer(const AffineHermitianFamily& fam, const InnerMaxOptions& opts)
      : opts_(opts), m_(static_cast<Index>(fam.terms.size())) {
    E0_ = hermitian_embedding(fam.F0);
    for (const auto& T : fam.terms) Ei_.push_back(hermitian_embedding(T));
  }

  InnerMaxResult run(const std::vector<Vector>& warm_starts) const {
    InnerMaxResult best;
    if (m_ == 0) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(E0_, Eigen::EigenvaluesOnly);
      best.lambda_min = es.eigenvalues()(0);
      best.d = Vector(0);
      return best;
    }
    std::vector<Vector> starts = warm_starts;
    starts.push_back(Vector::Ones(m_));
    for (const Vector& d0 : starts) {
      if (d0.size() != m_ || (d0.array() <= 0.0).any() || !d0.allFinite()) continue;
      InnerMaxResult cand = ascend(d0.array().log().matrix());
      if (cand.lambda_min > best.lambda_min) best = cand;
    }
    return best;
  }

 private:
  Matrix assemble(const Vector& d) const {
    Matrix F = E0_;
    for (Index i = 0; i < m_; ++i) F += d(i) * Ei_[i];
    return F;
  }

  double true_value(const Vector& x) const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(assemble(x.array().exp().matrix()),
                                             Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
  }

  struct Smoothed {
    double value;      // f_mu
    double lambda_min;
    Vector grad;       // d f_mu / d log d
  };

  Smoothed smoothed_eval(const Vector& x, double mu) const {
    const Vector d = x.array().exp().matrix();
    Eigen::SelfAdjointEigenSolver<Matrix> es(assemble(d));
    const Vector& lam = es.eigenvalues();
    const Matrix& V = es.eigenvectors();
    Smoothed out;
    out.lambda_min = lam(0);
    Vector w = (-(lam.array() - lam(0)) / mu).exp();
    const double total = w.sum();
    w /= total;
    out.value = lam(0) - mu * std::log(total);
    out.grad = Vector::Zero(m_);
    for (Index k = 0; k < lam.size(); ++k) {
      if (w(k) < 1e-14) continue;
      for (Index i = 0; i < m_; ++i)
        out.grad(i) += w(k) * d(i) * V.col(k).dot(Ei_[i] * V.col(k));
    }
    return out;
  }

  InnerMaxResult ascend(Vector x) const {
    const double lim = opts_.log10_bracket * std::log(10.0);
    auto clamp_vec = [&](Vector& v) {
      for (Index i = 0; i < v.size(); ++i) v(i) = std::clamp(v(i), -lim, lim);
    };
    clamp_vec(x);

    if (m_ == 1) {
      double fx = true_value(x);
      golden_coordinate(x, 0, fx);
      return {fx, x.array().exp().matrix()};
    }

    // scale for the smoothing schedule
    {
      Eigen::SelfAdjointEigenSolver<Matrix> es(assemble(x.array().exp().matrix()),
                                               Eigen::EigenvaluesOnly);
      const double spread =
          es.eigenvalues()(es.eigenvalues().size() - 1) - es.eigenvalues()(0);
      mu0_ = std::max(spread, 1e-300);
    }

    for (int stage = 0; stage < opts_.smoothing_stages; ++stage) {
      const double mu = mu0_ * std::pow(10.0, -1.0 - stage);
      double step = 0.5;
      Smoothed cur = smoothed_eval(x, mu);
      for (int iter = 0; iter < opts_.max_iterations && step > opts_.step_tol; ++iter) {
        const double gn = cur.grad.norm();
        if (gn < 1e-15 * std::max(1.0, std::abs(cur.value))) break;
        bool accepted = false;
        for (int tries = 0; tries < 12; ++tries) {
          Vector xt = x + (step / gn) * cur.grad;
          clamp_vec(xt);
          const Smoothed nxt = smoothed_eval(xt, mu);
          if (nxt.value > cur.value) {
            x = xt;
            cur = nxt;
            step *= 1.5;
            accepted = true;
            break;
          }
          step *= 0.4;
          if (step <= opts_.step_tol) break;
        }
        if (!accepted) break;
      }
    }

    double fx = true_value(x);
    for (int sweep = 0; sweep < 4; ++sweep) {
      const double before = fx;
      for (Index i = 0; i < m_; ++i) golden_coordinate(x, i, fx);
      if (fx - before <= 1e-10 * (std::abs(fx) + 1e-30)) break;
    }
    return {fx, x.array().exp().matrix()};
  }

  void golden_coordinate(Vector& x, Index i, double& fx) const {
    constexpr double inv_phi = 0.6180339887498949;
    const double lim = opts_.log10_bracket * std::log(10.0);
    double a = -lim, b = lim;
    auto f1d = [&](double t) {
      Vector xt = x;
      xt(i) = t;
      return true_value(xt);
    };
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = f1d(x1), f2 = f1d(x2);
    for (int it = 0; it < 72 && (b - a) > 1e-5; ++it) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + inv_phi * (b - a);
        f2 = f1d(x2);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - inv_phi * (b - a);
        f1 = f1d(x1);
      }
    }
    const double t = (f1 > f2) ? x1 : x2;
    const double ft = std::max(f1, f2);
    if (ft > fx) {
      x(i) = t;
      fx = ft;
    }
  }

  InnerMaxOptions opts_;
  Index m_;
  Matrix E0_;
  std::vector<Matrix> Ei_;
  mutable double mu0_ = 1.0;
};

}  // namespace detail

/// max_{d > 0} lambda_min(F0 + sum d_i terms[i]).
inline InnerMaxResult maximize_lambda_min(const AffineHermitianFamily& fam,
                                          const std::vector<Vector>& warm_starts = {},
                                          const InnerMaxOptions& opts = {}) {
  for (const auto& T : fam.terms)
    if (T.rows() != fam.F0.rows() || T.cols() != fam.F0.cols())
      throw DimensionError("maximize_lambda_min: term size mismatch");
  return detail::LambdaMinMaximizer(fam, opts).run(warm_starts);
}

/// Affine-in-gamma LMI family: F(d, gamma) = base(d) + gamma * gamma_term.
/// For sense=maximize the gamma term must be negative semidefinite (the
/// feasible gamma set is then a lower interval); for minimize, positive
/// semidefinite.
struct GammaLmiProblem {
  AffineHermitianFamily base;
  ComplexMatrix gamma_term;
};

enum class GammaSense { maximize, minimize };

struct GammaLmiOptions {
  double gamma_min = 1e-24;
  double gamma_max = 1e24;
  int max_bisection = 80;
  double rel_tol = 1e-4;
  double feas_margin_rel = 1e-9;  // strictness: lambda_min >= margin * ||F||
  InnerMaxOptions inner;
};

struct GammaLmiResult {
  double gamma = 0.0;
  Vector d;                  // certificate scalings (free entries only)
  double lambda_min = 0.0;   // certified margin at (d, gamma)
  bool hit_bracket_edge = false;
};

/// Largest (or smallest) gamma for which the LMI F(d, gamma) > 0 admits a
/// strictly feasible d. Bisection over log gamma; each feasibility test is an
/// inner concave maximization warm-started from the previous certificate.
inline std::optional<GammaLmiResult> lmi_max_gamma(
    const GammaLmiProblem& problem, GammaSense sense = GammaSense::maximize,
    const GammaLmiOptions& opts = {}, const std::vector<Vector>& warm_starts = {},
    std::optional<double> warm_gamma = std::nullopt) {
  if (problem.gamma_term.rows() != problem.base.F0.rows())
    throw DimensionError("lmi_max_gamma: gamma term size mismatch");

  std::vector<Vector> warm = warm_starts;
  auto try_gamma = [&](double gamma) -> std::optional<InnerMaxResult> {
    AffineHermitianFamily fam = problem.base;
    fam.F0 += gamma * problem.gamma_term;
    InnerMaxResult res = maximize_lambda_min(fam, warm, opts.inner);
    if (!(res.lambda_min > 0.0)) return std::nullopt;
    // Strictness margin on the diagonally equilibrated matrix: congruence
    // keeps the sign of lambda_min exact while removing the (often extreme)
    // row-scale spread of the assembled LMI, so the margin is meaningful for
    // every block at once.
    const ComplexMatrix F = fam.assemble(res.d.size() ? res.d : Vector(0));
    Vector s = F.diagonal().real().cwiseAbs();
    const double dmax = std::max(s.maxCoeff(), 1e-300);
    s = s.cwiseMax(1e-30 * dmax).cwiseSqrt().cwiseInverse();
    const double margin =
        detail::min_eig_value(ComplexMatrix(s.asDiagonal() * F * s.asDiagonal()));
    if (margin >= opts.feas_margin_rel) {
      if (res.d.size()) warm.assign(1, res.d);
      return res;
    }
    return std::nullopt;
  };

  // Work on a sign-flipped axis so that "maximize" logic serves both senses:
  // u = gamma for maximize, u = 1/gamma for minimize.
  const bool flip = sense == GammaSense::minimize;
  const double u_min = flip ? 1.0 / opts.gamma_max : opts.gamma_min;
  const double u_max = flip ? 1.0 / opts.gamma_min : opts.gamma_max;
  auto to_gamma = [&](double u) { return flip ? 1.0 / u : u; };

  auto feasible = [&](double u) { return try_gamma(to_gamma(u)); };

  std::optional<InnerMaxResult> at_lo = feasible(u_min);
  if (!at_lo) return std::nullopt;

  double u_lo = u_min;
  std::optional<InnerMaxResult> cert = at_lo;
  double u_hi = u_max;
  bool have_infeasible = false;

  const std::optional<double> warm_u =
      warm_gamma ? std::optional<double>(flip ? 1.0 / *warm_gamma : *warm_gamma)
                 : std::nullopt;
  if (warm_u && *warm_u > u_min && *warm_u < u_max) {
    const double w = *warm_u;
    if (auto r = feasible(w)) {
      u_lo = w;
      cert = r;
    } else {
      u_hi = w;
      have_infeasible = true;
    }
  }
  if (!have_infeasible) {
    // geometric march up from the best known feasible point
    double u = std::max(u_lo * 16.0, u_min * 16.0);
    while (u < u_max) {
      if (auto r = feasible(u)) {
        u_lo = u;
        cert = r;
        u *= 16.0;
      } else {
        u_hi = u;
        have_infeasible = true;
        break;
      }
    }
    if (!have_infeasible) {
      if (auto r = feasible(u_max)) {
        GammaLmiResult out;
        out.gamma = to_gamma(u_max);
        out.d = r->d;
        out.lambda_min = r->lambda_min;
        out.hit_bracket_edge = true;
        return out;
      }
      u_hi = u_max;
    }
  }

  for (int it = 0; it < opts.max_bisection && (u_hi - u_lo) > opts.rel_tol * u_hi; ++it) {
    const double mid = std::sqrt(u_lo * u_hi);
    if (auto r = feasible(mid)) {
      u_lo = mid;
      cert = r;
    } else {
      u_hi = mid;
    }
  }

  GammaLmiResult out;
  out.gamma = to_gamma(u_lo);
  out.d = cert->d;
  out.lambda_min = cert->lambda_min;
  out.hit_bracket_edge = (u_lo == u_min);
  return out;
}

}  // namespace modred
