#include <random>

#include "catch_amalgamated.hpp"
#include "modred/freq_response.hpp"
#include "modred/hinf.hpp"
#include "modred/reduction.hpp"
#include "modred/weight_fit.hpp"

using namespace modred;

namespace {

std::mt19937_64 rng(0xBEEF01);

Matrix randn(Index r, Index c) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix M(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) M(i, j) = g(rng);
  return M;
}

StateSpaceModel random_stable(Index n, Index m, Index p, double margin = 0.4) {
  StateSpaceModel sys;
  sys.A = randn(n, n);
  sys.A.diagonal().array() -= stability_report(sys.A).max_real_part + margin;
  sys.B = randn(n, m);
  sys.C = randn(p, n);
  sys.D = Matrix::Zero(p, m);
  return sys;
}

const FrequencyGrid kGrid = FrequencyGrid::logspace(1e-3, 1e3, 200);

double error_norm(const StateSpaceModel& g, const StateSpaceModel& gr) {
  return hinf_norm(parallel_diff(g, gr), kGrid).value;
}

}  // namespace

TEST_CASE("a_priori_bound: tail-sum formulas") {
  Vector h(3);
  h << 4, 2, 1;
  CHECK(a_priori_bound(h, 3, BoundConvention::plain_tail_sum) == 0.0);
  CHECK(a_priori_bound(h, 1, BoundConvention::plain_tail_sum) == 3.0);
  CHECK(a_priori_bound(h, 1, BoundConvention::twice_distinct_tail_sum) == 6.0);
  CHECK(a_priori_bound(h, 0, BoundConvention::plain_tail_sum) == 7.0);

  Vector rep(4);
  rep << 4, 2, 2, 2;  // repeated values count once under the twice convention
  CHECK(a_priori_bound(rep, 1, BoundConvention::twice_distinct_tail_sum) == 4.0);

  Vector bad(2);
  bad << 1, 2;
  CHECK_THROWS_AS(a_priori_bound(bad, 0, BoundConvention::plain_tail_sum), InvalidArgument);
  CHECK_THROWS_AS(a_priori_bound(h, 4, BoundConvention::plain_tail_sum), InvalidArgument);
}

TEST_CASE("balanced_truncate: full order reproduces the system") {
  const StateSpaceModel sys = random_stable(5, 2, 2);
  const ReductionResult res = balanced_truncate(sys, 5);
  CHECK(res.reduced.n() == 5);
  CHECK(error_norm(sys, res.reduced) <= 1e-9);
  CHECK(*res.a_priori_bound == 0.0);
}

TEST_CASE("balanced_truncate: order zero is the static feedthrough") {
  StateSpaceModel sys = random_stable(4, 1, 1);
  sys.D = Matrix::Constant(1, 1, 0.7);
  const ReductionResult res = balanced_truncate(sys, 0);
  CHECK(res.reduced.n() == 0);
  CHECK(res.reduced.D(0, 0) == 0.7);
  CHECK(*res.a_priori_bound == Catch::Approx(res.hankel.sum()));
}

TEST_CASE("balanced_truncate: preconditions") {
  StateSpaceModel unstable;
  unstable.A = Matrix::Constant(1, 1, 0.2);
  unstable.B = unstable.C = unstable.D = Matrix::Ones(1, 1);
  CHECK_THROWS_AS(balanced_truncate(unstable, 0), UnstableSystemError);
  CHECK_THROWS_AS(balanced_truncate(random_stable(3, 1, 1), 4), InvalidArgument);
}

TEST_CASE("balanced_truncate: stability, bound validity, monotonicity") {
  for (int trial = 0; trial < 12; ++trial) {
    const Index n = 3 + trial % 6;
    const StateSpaceModel sys = random_stable(n, 1 + trial % 2, 1 + (trial + 1) % 2);
    double prev_bound = std::numeric_limits<double>::infinity();
    for (Index r = 1; r <= n; ++r) {
      const ReductionResult res =
          balanced_truncate(sys, r, BoundConvention::twice_distinct_tail_sum);
      CHECK(is_stable(res.reduced));
      CHECK(error_norm(sys, res.reduced) <= *res.a_priori_bound * (1 + 1e-7) + 1e-12);
      CHECK(*res.a_priori_bound <= prev_bound * (1 + 1e-12));
      prev_bound = *res.a_priori_bound;
    }
  }
}

TEST_CASE("balanced_truncate: keeps the dominant channel") {
  // diag(1/(s+1), 2/(s+1)): Hankel values 1.0 and 0.5; r=1 keeps channel 2
  StateSpaceModel two;
  two.A = -Matrix::Identity(2, 2);
  two.B = Matrix::Identity(2, 2);
  two.C = (Matrix(2, 2) << 1, 0, 0, 2).finished();
  two.D = Matrix::Zero(2, 2);
  const ReductionResult res = balanced_truncate(two, 1);
  const ComplexMatrix G = freq_response(res.reduced, 1e-3);
  CHECK(std::abs(G(1, 1)) == Catch::Approx(2.0).epsilon(1e-4));
  CHECK(std::abs(G(0, 0)) < 1e-9);
}

TEST_CASE("fw_balanced_truncate: unit static weight reduces to plain truncation") {
  const StateSpaceModel sys = random_stable(6, 2, 2);
  const StateSpaceModel unit = StateSpaceModel::static_gain(Matrix::Identity(1, 1));
  const ReductionResult plain = balanced_truncate(sys, 3);
  const ReductionResult weighted = fw_balanced_truncate(sys, unit, 3);
  REQUIRE(weighted.hankel.size() == plain.hankel.size());
  CHECK((weighted.hankel - plain.hankel).cwiseAbs().maxCoeff() <=
        1e-8 * plain.hankel(0));
  CHECK_FALSE(weighted.a_priori_bound.has_value());
  const FrequencyResponseEvaluator ew(weighted.reduced), ep(plain.reduced);
  for (double w : {0.1, 1.0, 10.0}) {
    const ComplexMatrix a = ew(w), b = ep(w);
    CHECK((a - b).norm() <= 1e-8 * std::max(1.0, b.norm()));
  }
}

TEST_CASE("fw_balanced_truncate: lowpass weight picks the low-frequency mode") {
  // Two well-separated modes; the unweighted ordering prefers the strong
  // fast mode, a lowpass weight must flip the choice to the slow one.
  StateSpaceModel sys;
  sys.A = Matrix::Zero(2, 2);
  sys.A(0, 0) = -0.5;   // slow mode near w = 0.5
  sys.A(1, 1) = -40.0;  // fast mode near w = 40
  sys.B = (Matrix(2, 1) << 0.5, 40.0).finished();
  sys.C = (Matrix(1, 2) << 1.0, 2.0).finished();
  sys.D = Matrix::Zero(1, 1);

  StateSpaceModel lowpass;  // 2/(s+2)
  lowpass.A = Matrix::Constant(1, 1, -2.0);
  lowpass.B = Matrix::Constant(1, 1, 1.0);
  lowpass.C = Matrix::Constant(1, 1, 2.0);
  lowpass.D = Matrix::Zero(1, 1);

  const ReductionResult enns = fw_balanced_truncate(sys, lowpass, 1);

  // Brute force: every 1-state candidate from the weighted balanced basis.
  const Matrix P = lyapunov_solve(sys.A, sys.B * sys.B.transpose());
  const StateSpaceModel cas = series(sys, lowpass);
  const Matrix Qcas = lyapunov_solve(cas.A.transpose(), cas.C.transpose() * cas.C);
  const Matrix Qw = Qcas.topLeftCorner(2, 2);
  const Matrix Lp = psd_factor(P), Lq = psd_factor(Qw);
  Eigen::JacobiSVD<Matrix> svd(Lq.transpose() * Lp,
                               Eigen::ComputeFullU | Eigen::ComputeFullV);
  double best = std::numeric_limits<double>::infinity();
  for (int keep = 0; keep < 2; ++keep) {
    const double s = svd.singularValues()(keep);
    const Matrix T = Lp * svd.matrixV().col(keep) / std::sqrt(s);
    const Matrix L = svd.matrixU().col(keep).transpose() * Lq.transpose() / std::sqrt(s);
    StateSpaceModel cand;
    cand.A = L * sys.A * T;
    cand.B = L * sys.B;
    cand.C = sys.C * T;
    cand.D = sys.D;
    if (!is_stable(cand)) continue;
    best = std::min(best,
                    hinf_norm(series(parallel_diff(sys, cand), lowpass), kGrid).value);
  }
  const double enns_err =
      hinf_norm(series(parallel_diff(sys, enns.reduced), lowpass), kGrid).value;
  CHECK(enns_err <= best * (1 + 1e-8));

  // and the retained direction leans on the slow mode, not the fast one
  CHECK(std::abs(enns.reduced.A(0, 0)) < 20.0);
}

TEST_CASE("fit_rational_weight: constant profile gives a static gain") {
  const FrequencyGrid grid = FrequencyGrid::logspace(0.1, 100, 50);
  const WeightFitResult res =
      fit_rational_weight(Vector::Constant(50, 0.1), grid, 4);
  CHECK(res.weight.n() == 0);
  CHECK(res.weight.D(0, 0) == Catch::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("fit_rational_weight: order-1 fit inverts a first-order profile") {
  const FrequencyGrid grid = FrequencyGrid::logspace(1e-2, 1e2, 120);
  Vector profile(120);
  for (Index i = 0; i < 120; ++i)
    profile(i) = 1.0 / std::hypot(1.0, grid[static_cast<std::size_t>(i)]);
  const WeightFitResult res = fit_rational_weight(profile, grid, 1);
  REQUIRE(is_stable(res.weight));
  const FrequencyResponseEvaluator eval(res.weight);
  for (std::size_t i = 0; i < 120; i += 5) {
    const double want = std::hypot(1.0, grid[i]);  // |iw + 1|
    const double got = std::abs(eval(grid[i])(0, 0));
    CHECK(got == Catch::Approx(want).epsilon(0.01));
  }
}

TEST_CASE("fit_rational_weight: never undershoots the inverse profile") {
  const FrequencyGrid grid = FrequencyGrid::logspace(1.0, 1e4, 300);
  Vector profile(300);
  for (Index i = 0; i < 300; ++i) {
    const double w = grid[static_cast<std::size_t>(i)];
    profile(i) = 1e-4 * (1.0 + std::pow(w / 300.0, 2)) / (1.0 + std::pow(w / 3000.0, 1.5));
  }
  const WeightFitResult res = fit_rational_weight(profile, grid, 8);
  REQUIRE(is_stable(res.weight));
  CHECK(res.kappa <= 2.0);
  const FrequencyResponseEvaluator eval(res.weight);
  for (std::size_t i = 0; i < 300; ++i) {
    const double mag = std::abs(eval(grid[i])(0, 0));
    CHECK(mag * profile(static_cast<Index>(i)) >= 1.0 - 1e-9);
  }
}

TEST_CASE("fit_rational_weight: rejects nonpositive profiles") {
  const FrequencyGrid grid = FrequencyGrid::logspace(0.1, 10, 10);
  Vector profile = Vector::Constant(10, 1.0);
  profile(3) = 0.0;
  CHECK_THROWS_AS(fit_rational_weight(profile, grid, 2), InvalidArgument);
}
