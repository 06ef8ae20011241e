#include <unsupported/Eigen/MatrixFunctions>

#include <random>

#include "catch_amalgamated.hpp"
#include "modred/freq_response.hpp"
#include "modred/gramians.hpp"
#include "modred/hinf.hpp"
#include "modred/stability.hpp"
#include "modred/state_space.hpp"

using namespace modred;

namespace {

std::mt19937_64 rng(0xC0FFEE);

Matrix randn(Index r, Index c) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix M(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) M(i, j) = g(rng);
  return M;
}

StateSpaceModel random_stable(Index n, Index m, Index p, double margin = 0.3) {
  StateSpaceModel sys;
  sys.A = randn(n, n);
  sys.A.diagonal().array() -= stability_report(sys.A).max_real_part + margin;
  sys.B = randn(n, m);
  sys.C = randn(p, n);
  sys.D = randn(p, m);
  return sys;
}

// Independent oracle: dense full-pivot complex solve, no Hessenberg, no
// structure exploitation.
ComplexMatrix dense_response(const StateSpaceModel& sys, double omega) {
  const ComplexMatrix R =
      (Complex(0, omega) * ComplexMatrix::Identity(sys.n(), sys.n()) - sys.A.cast<Complex>());
  return sys.C.cast<Complex>() * R.fullPivLu().solve(sys.B.cast<Complex>()) +
         sys.D.cast<Complex>();
}

// Independent oracle: adaptive Simpson quadrature of int_0^T e^{At} Q e^{A't} dt.
Matrix quadrature_gramian(const Matrix& A, const Matrix& Q) {
  const double decay = -stability_report(A).max_real_part;
  const double T = 40.0 / decay;
  auto integrand = [&](double t) -> Matrix {
    const Matrix E = (A * t).exp();
    return E * Q * E.transpose();
  };
  Matrix prev;
  for (int n = 64; n <= 16384; n *= 2) {
    const double h = T / n;
    Matrix sum = integrand(0.0) + integrand(T);
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * integrand(i * h);
    Matrix est = (h / 3.0) * sum;
    if (prev.size() && (est - prev).norm() <= 1e-9 * est.norm()) return est;
    prev = est;
  }
  return prev;
}

}  // namespace

TEST_CASE("freq_response: first-order analytic value") {
  StateSpaceModel sys;
  sys.A = Matrix::Constant(1, 1, -1.0);
  sys.B = Matrix::Constant(1, 1, 1.0);
  sys.C = Matrix::Constant(1, 1, 1.0);
  sys.D = Matrix::Zero(1, 1);
  const ComplexMatrix G = freq_response(sys, 1.0);
  CHECK(std::abs(G(0, 0) - Complex(0.5, -0.5)) < 1e-14);
}

TEST_CASE("freq_response: static gain passes through") {
  const StateSpaceModel sys = StateSpaceModel::static_gain((Matrix(2, 2) << 2, 0, 0, 3).finished());
  for (double w : {0.1, 17.5, 3000.0}) {
    const ComplexMatrix G = freq_response(sys, w);
    CHECK((G - sys.D.cast<Complex>()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("freq_response: matches dense linear-solve oracle") {
  std::uniform_real_distribution<double> uw(0.05, 50.0);
  for (int trial = 0; trial < 25; ++trial) {
    const StateSpaceModel sys = random_stable(2 + trial % 9, 1 + trial % 3, 1 + trial % 2);
    const FrequencyResponseEvaluator eval(sys);
    for (int k = 0; k < 4; ++k) {
      const double w = uw(rng);
      const ComplexMatrix got = eval(w);
      const ComplexMatrix want = dense_response(sys, w);
      REQUIRE((got - want).norm() <= 1e-10 * std::max(1.0, want.norm()));
    }
  }
}

TEST_CASE("freq_response: block-diagonal and tridiagonal structures agree with oracle") {
  // modal-style blocks (tridiagonal) stacked with a dense block
  StateSpaceModel modal;
  modal.A = Matrix::Zero(4, 4);
  modal.A(0, 1) = 1;
  modal.A(1, 0) = -4;
  modal.A(1, 1) = -0.4;
  modal.A(2, 3) = 1;
  modal.A(3, 2) = -25;
  modal.A(3, 3) = -1.0;
  modal.B = randn(4, 2);
  modal.C = randn(2, 4);
  modal.D = Matrix::Zero(2, 2);
  const StateSpaceModel dense = random_stable(5, 2, 2);
  StateSpaceModel both = parallel_diff(modal, dense);
  const FrequencyResponseEvaluator eval(both);
  for (double w : {0.3, 2.1, 9.7, 44.0}) {
    const ComplexMatrix got = eval(w);
    const ComplexMatrix want = dense_response(both, w);
    REQUIRE((got - want).norm() <= 1e-10 * std::max(1.0, want.norm()));
  }
}

TEST_CASE("freq_response: near-singular resolvent names the eigenvalue") {
  StateSpaceModel osc;  // undamped oscillator, poles at +-i
  osc.A = (Matrix(2, 2) << 0, 1, -1, 0).finished();
  osc.B = (Matrix(2, 1) << 0, 1).finished();
  osc.C = (Matrix(1, 2) << 1, 0).finished();
  osc.D = Matrix::Zero(1, 1);
  try {
    freq_response(osc, 1.0);
    FAIL("expected SingularResolventError");
  } catch (const SingularResolventError& e) {
    CHECK(e.omega == 1.0);
    CHECK(std::abs(e.eigenvalue - Complex(0, 1)) < 1e-8);
  }
  // away from the pole everything is fine
  CHECK(std::abs(freq_response(osc, 2.0)(0, 0) - Complex(-1.0 / 3.0, 0)) < 1e-12);
}

TEST_CASE("freq_response: rejects nonpositive omega and bad dimensions") {
  const StateSpaceModel sys = random_stable(3, 1, 1);
  CHECK_THROWS_AS(freq_response(sys, 0.0), InvalidArgument);
  CHECK_THROWS_AS(freq_response(sys, -1.0), InvalidArgument);
  StateSpaceModel bad = sys;
  bad.B = randn(2, 1);
  CHECK_THROWS_AS(freq_response(bad, 1.0), DimensionError);
  StateSpaceModel nan = sys;
  nan.A(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(freq_response(nan, 1.0), InvalidArgument);
}

TEST_CASE("is_stable: signs and marginal handling") {
  StateSpaceModel s1, s2;
  s1.A = Matrix::Constant(1, 1, -1.0);
  s1.B = s1.C = s1.D = Matrix::Zero(1, 1);
  s1.B.setOnes();
  s1.C.setOnes();
  s2 = s1;
  s2.A(0, 0) = 1.0;
  CHECK(is_stable(s1));
  CHECK_FALSE(is_stable(s2));

  StateSpaceModel marginal = s1;
  marginal.A(0, 0) = 0.0;
  const StabilityReport rep = stability_report(marginal);
  CHECK_FALSE(rep.stable);
  CHECK(rep.marginal_count == 1);

  CHECK(is_stable(StateSpaceModel::static_gain(Matrix::Ones(2, 2))));
}

TEST_CASE("is_stable: invariant under state similarity") {
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 2 + trial % 6;
    StateSpaceModel sys = random_stable(n, 1, 1);
    if (trial % 2) sys.A.diagonal().array() += 1.5;  // mix in unstable cases
    Matrix T = randn(n, n) + 3.0 * Matrix::Identity(n, n);
    StateSpaceModel moved = sys;
    const Matrix Tinv = T.inverse();
    moved.A = T * sys.A * Tinv;
    moved.B = T * sys.B;
    moved.C = sys.C * Tinv;
    CHECK(is_stable(sys) == is_stable(moved));
  }
}

TEST_CASE("lyapunov_solve: scalar and decoupled analytics") {
  CHECK(std::abs(lyapunov_solve(Matrix::Constant(1, 1, -1.0), Matrix::Constant(1, 1, 1.0))(0, 0) -
                 0.5) < 1e-12);
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = -1;
  A(1, 1) = -2;
  const Matrix X = lyapunov_solve(A, Matrix::Identity(2, 2));
  CHECK(std::abs(X(0, 0) - 0.5) < 1e-12);
  CHECK(std::abs(X(1, 1) - 0.25) < 1e-12);
  CHECK(std::abs(X(0, 1)) < 1e-12);
}

TEST_CASE("lyapunov_solve: matches quadrature oracle on a random 8-state system") {
  const StateSpaceModel sys = random_stable(8, 3, 1, 0.5);
  const Matrix Q = sys.B * sys.B.transpose();
  const Matrix X = lyapunov_solve(sys.A, Q);
  const Matrix Xq = quadrature_gramian(sys.A, Q);
  CHECK((X - Xq).norm() <= 1e-6 * Xq.norm());
}

TEST_CASE("lyapunov_solve: residual property over random systems") {
  for (int trial = 0; trial < 15; ++trial) {
    const Index n = 2 + trial;
    const StateSpaceModel sys = random_stable(n, 2, 2);
    const Matrix Q = sys.B * sys.B.transpose();
    const Matrix X = lyapunov_solve(sys.A, Q);
    const double res = (sys.A * X + X * sys.A.transpose() + Q).norm();
    CHECK(res <= 1e-8 * std::max(1.0, Q.norm()));
  }
}

TEST_CASE("lyapunov_solve: error paths") {
  CHECK_THROWS_AS(lyapunov_solve(Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0)),
                  UnstableSystemError);
  Matrix A = -Matrix::Identity(2, 2);
  Matrix Q = (Matrix(2, 2) << 1, 2, 3, 4).finished();  // not symmetric
  CHECK_THROWS_AS(lyapunov_solve(A, Q), InvalidArgument);
  CHECK_THROWS_AS(lyapunov_solve(A, Matrix::Identity(3, 3)), DimensionError);
}

TEST_CASE("gramians: first-order system and static gain") {
  StateSpaceModel sys;
  sys.A = Matrix::Constant(1, 1, -1.0);
  sys.B = Matrix::Constant(1, 1, 1.0);
  sys.C = Matrix::Constant(1, 1, 1.0);
  sys.D = Matrix::Zero(1, 1);
  const GramianPair g = gramians(sys);
  CHECK(std::abs(g.P(0, 0) - 0.5) < 1e-12);
  CHECK(std::abs(g.Q(0, 0) - 0.5) < 1e-12);

  const GramianPair ge = gramians(StateSpaceModel::static_gain(Matrix::Ones(2, 3)));
  CHECK(ge.P.rows() == 0);
  CHECK(ge.Q.rows() == 0);
}

TEST_CASE("hankel_singular_values: analytics and properties") {
  StateSpaceModel sys;
  sys.A = Matrix::Constant(1, 1, -1.0);
  sys.B = Matrix::Constant(1, 1, 1.0);
  sys.C = Matrix::Constant(1, 1, 1.0);
  sys.D = Matrix::Zero(1, 1);
  const Vector h1 = hankel_singular_values(sys);
  REQUIRE(h1.size() == 1);
  CHECK(std::abs(h1(0) - 0.5) < 1e-12);

  // diag(1/(s+1), 2/(s+1)) -> [1.0, 0.5]
  StateSpaceModel two;
  two.A = -Matrix::Identity(2, 2);
  two.B = Matrix::Identity(2, 2);
  two.C = (Matrix(2, 2) << 1, 0, 0, 2).finished();
  two.D = Matrix::Zero(2, 2);
  const Vector h2 = hankel_singular_values(two);
  REQUIRE(h2.size() == 2);
  CHECK(std::abs(h2(0) - 1.0) < 1e-12);
  CHECK(std::abs(h2(1) - 0.5) < 1e-12);

  for (int trial = 0; trial < 20; ++trial) {
    const Vector h = hankel_singular_values(random_stable(2 + trial % 7, 2, 2));
    for (Index i = 0; i < h.size(); ++i) {
      CHECK(h(i) >= 0.0);
      if (i > 0) CHECK(h(i) <= h(i - 1) * (1 + 1e-12));
    }
  }
  CHECK_THROWS_AS(hankel_singular_values([] {
                    StateSpaceModel s;
                    s.A = Matrix::Constant(1, 1, 1.0);
                    s.B = s.C = s.D = Matrix::Ones(1, 1);
                    return s;
                  }()),
                  UnstableSystemError);
}

TEST_CASE("hinf_norm: analytics") {
  StateSpaceModel lp;
  lp.A = Matrix::Constant(1, 1, -1.0);
  lp.B = Matrix::Constant(1, 1, 1.0);
  lp.C = Matrix::Constant(1, 1, 1.0);
  lp.D = Matrix::Zero(1, 1);
  const FrequencyGrid grid = FrequencyGrid::logspace(1e-2, 1e2, 60);
  const HinfResult r = hinf_norm(lp, grid);
  CHECK(std::abs(r.value - 1.0) < 1e-6);
  CHECK(r.omega_peak < 1e-2);

  const HinfResult rs = hinf_norm(StateSpaceModel::static_gain(Matrix::Constant(1, 1, 3.0)), grid);
  CHECK(rs.value == 3.0);

  CHECK_THROWS_AS(hinf_norm([] {
                    StateSpaceModel s;
                    s.A = Matrix::Constant(1, 1, 0.5);
                    s.B = s.C = s.D = Matrix::Ones(1, 1);
                    return s;
                  }(), grid),
                  UnstableSystemError);
}

TEST_CASE("hinf_norm: dominates every grid sample") {
  const FrequencyGrid grid = FrequencyGrid::logspace(1e-2, 1e3, 120);
  for (int trial = 0; trial < 10; ++trial) {
    const StateSpaceModel sys = random_stable(4 + trial % 5, 2, 2);
    const HinfResult r = hinf_norm(sys, grid);
    const FrequencyResponseEvaluator eval(sys);
    for (std::size_t i = 0; i < grid.size(); i += 7)
      CHECK(r.value >= sigma_max(eval(grid[i])) * (1 - 1e-12));
  }
}

TEST_CASE("hinf_norm: grid+refinement agrees with Hamiltonian bisection") {
  const FrequencyGrid grid = FrequencyGrid::logspace(1e-3, 1e3, 240);
  {
    StateSpaceModel lp;
    lp.A = Matrix::Constant(1, 1, -1.0);
    lp.B = Matrix::Constant(1, 1, 1.0);
    lp.C = Matrix::Constant(1, 1, 1.0);
    lp.D = Matrix::Zero(1, 1);
    CHECK(std::abs(hinf_norm_bisection(lp).value - 1.0) < 1e-5);
  }
  for (int trial = 0; trial < 12; ++trial) {
    const StateSpaceModel sys = random_stable(3 + trial % 6, 1 + trial % 2, 1 + trial % 3);
    const double grid_val = hinf_norm(sys, grid).value;
    const double exact = hinf_norm_bisection(sys).value;
    CHECK(grid_val <= exact * (1 + 1e-5));
    CHECK(grid_val >= exact * (1 - 2e-3));
  }
}

TEST_CASE("parallel_diff: zero difference and static gains") {
  const StateSpaceModel g = random_stable(4, 2, 2);
  const StateSpaceModel zero = parallel_diff(g, g);
  const FrequencyResponseEvaluator eval(zero);
  for (double w : {0.1, 1.0, 5.0, 20.0, 90.0})
    CHECK(eval(w).norm() < 1e-10);

  const StateSpaceModel d = parallel_diff(StateSpaceModel::static_gain(Matrix::Ones(1, 1)),
                                          StateSpaceModel::static_gain(3 * Matrix::Ones(1, 1)));
  CHECK(d.n() == 0);
  CHECK(d.D(0, 0) == 2.0);

  StateSpaceModel wrong = random_stable(3, 1, 2);
  CHECK_THROWS_AS(parallel_diff(g, wrong), DimensionError);
}

TEST_CASE("parallel_diff: response equals response difference") {
  std::uniform_real_distribution<double> uw(0.1, 60.0);
  for (int trial = 0; trial < 15; ++trial) {
    const StateSpaceModel g = random_stable(2 + trial % 5, 2, 3);
    const StateSpaceModel h = random_stable(1 + trial % 4, 2, 3);
    const StateSpaceModel diff = parallel_diff(g, h);
    const double w = uw(rng);
    const ComplexMatrix want = dense_response(h, w) - dense_response(g, w);
    const ComplexMatrix got = dense_response(diff, w);
    CHECK((got - want).norm() <= 1e-10 * std::max(1.0, want.norm()));
  }
}

TEST_CASE("FrequencyGrid: validation and logspace") {
  CHECK_THROWS_AS(validate(FrequencyGrid{}), InvalidArgument);
  CHECK_THROWS_AS(validate(FrequencyGrid{{1.0, 1.0}}), InvalidArgument);
  CHECK_THROWS_AS(validate(FrequencyGrid{{-1.0, 1.0}}), InvalidArgument);
  const FrequencyGrid g = FrequencyGrid::logspace(std::pow(10.0, 1.5), 1e4, 1000);
  validate(g);
  CHECK(g.size() == 1000);
  CHECK(g[0] == Catch::Approx(31.6227766).epsilon(1e-9));
  CHECK(g[999] == 1e4);
}
