#include <random>

#include "catch_amalgamated.hpp"
#include "modred/mu.hpp"

using namespace modred;

namespace {

std::mt19937_64 rng(0x5CA1E);

ComplexMatrix randc(Index r, Index c) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix M(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) M(i, j) = Complex(g(rng), g(rng));
  return M;
}

BlockStructure two_scalars() {
  BlockStructure bs;
  bs.subsystem_blocks = {{1, 1}, {1, 1}};
  return bs;
}

}  // namespace

TEST_CASE("expand_scalings: identity, scalar block, benchmark run-lengths") {
  {
    BlockStructure bs = two_scalars();
    const auto [row, col] = expand_scalings(ScalingPair::ones(bs), bs);
    CHECK(row == Vector::Ones(2));
    CHECK(col == Vector::Ones(2));
  }
  {
    BlockStructure bs;
    bs.subsystem_blocks = {{3, 3}};  // one square block, no performance channel
    ScalingPair s = ScalingPair::ones(bs);
    s.d(0) = 1.0;
    // pinning the only entry means d stays 1; scale invariance is exercised below
    const auto [row, col] = expand_scalings(s, bs);
    CHECK(row.size() == 3);
    CHECK(col.size() == 3);
  }
  {
    // three blocks 2x2, 4x5, 3x2 plus 1x1 performance: row runs (2,5,2,1),
    // column runs (2,4,3,1)
    BlockStructure bs;
    bs.subsystem_blocks = {{2, 2}, {4, 5}, {3, 2}};
    bs.performance_block = UncertainBlock{1, 1};
    ScalingPair s = ScalingPair::ones(bs);
    s.d << 2.0, 3.0, 5.0;
    s.d_c = 1.0;
    const auto [row, col] = expand_scalings(s, bs);
    REQUIRE(row.size() == 10);
    REQUIRE(col.size() == 10);
    Vector row_want(10), col_want(10);
    row_want << 2, 2, 3, 3, 3, 3, 3, 5, 5, 1;
    col_want << 2, 2, 3, 3, 3, 3, 5, 5, 5, 1;
    CHECK(row == row_want);
    CHECK(col == col_want);
  }
}

TEST_CASE("scaled_sv: scalars cancel for a single block") {
  BlockStructure bs;
  bs.subsystem_blocks = {{3, 4}};
  const ComplexMatrix M = randc(4, 3);
  ScalingPair s = ScalingPair::ones(bs);
  const double base = scaled_sv(M, s, bs);
  CHECK(base == Catch::Approx(sigma_max(M)).epsilon(1e-12));
}

TEST_CASE("scaled_sv: closed form for the antidiagonal two-block matrix") {
  // M = [[0, 4], [1, 0]] with two scalar blocks and d = (t^2, 1):
  // the scaled matrix is [[0, 4/t], [t, 0]], value max(4/t, t); the optimal
  // t = 2 equalizes both terms at the structured singular value 2.
  BlockStructure bs = two_scalars();
  ComplexMatrix M(2, 2);
  M << 0, 4, 1, 0;
  for (double t : {0.5, 1.0, 2.0, 3.0}) {
    ScalingPair s = ScalingPair::ones(bs);
    s.d(1) = 1.0;
    s.d(0) = t * t;
    s.normalized_index = 1;
    CHECK(scaled_sv(M, s, bs) == Catch::Approx(std::max(4.0 / t, t)).epsilon(1e-12));
  }
}

TEST_CASE("scaled_sv: matches an explicitly constructed scaling") {
  BlockStructure bs;
  bs.subsystem_blocks = {{2, 3}, {3, 2}};
  bs.performance_block = UncertainBlock{1, 2};
  const ComplexMatrix M = randc(bs.row_dim(), bs.col_dim());
  std::uniform_real_distribution<double> ud(0.1, 10.0);
  for (int trial = 0; trial < 25; ++trial) {
    ScalingPair s = ScalingPair::ones(bs);
    s.d(0) = ud(rng);
    s.d(1) = ud(rng);
    s.d_c = 1.0;
    s.normalized_index = 2;
    const auto [row, col] = expand_scalings(s, bs);
    Matrix Dr = Matrix::Zero(row.size(), row.size());
    Dr.diagonal() = row;
    Matrix Dc = Matrix::Zero(col.size(), col.size());
    Dc.diagonal() = col;
    const ComplexMatrix explicit_scaled =
        Dr.cwiseSqrt().inverse().cast<Complex>() * M * Dc.cwiseSqrt().cast<Complex>();
    CHECK(scaled_sv(M, s, bs) ==
          Catch::Approx(sigma_max(explicit_scaled)).epsilon(1e-12));
  }
}

TEST_CASE("scaled_sv: invariant under common rescaling of all entries") {
  BlockStructure bs;
  bs.subsystem_blocks = {{2, 2}, {1, 3}};
  bs.performance_block = UncertainBlock{2, 1};
  const ComplexMatrix M = randc(bs.row_dim(), bs.col_dim());
  std::uniform_real_distribution<double> ud(0.2, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    ScalingPair s = ScalingPair::ones(bs);
    s.d(0) = ud(rng);
    s.d(1) = ud(rng);
    s.d_c = 1.0;
    s.normalized_index = 2;
    const double base = scaled_sv(M, s, bs);
    const double alpha = ud(rng);
    ScalingPair scaled = s;
    scaled.d *= alpha;
    scaled.d_c *= alpha;
    // validate() would reject the broken normalization, so bypass it here:
    // the claim is about the value, which only sees the expanded diagonals.
    const auto [row, col] = expand_scalings(scaled, bs);
    const ComplexMatrix Ms = row.cwiseSqrt().cwiseInverse().asDiagonal() * M *
                             col.cwiseSqrt().asDiagonal();
    CHECK(sigma_max(Ms) == Catch::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("scaled_sv: convex along random segments in log-d") {
  BlockStructure bs;
  bs.subsystem_blocks = {{2, 2}, {2, 2}};
  bs.performance_block = UncertainBlock{1, 1};
  std::uniform_real_distribution<double> ux(-2.0, 2.0);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const ComplexMatrix M = randc(bs.row_dim(), bs.col_dim());
    for (int seg = 0; seg < 25; ++seg) {
      Vector xa(3), xb(3);
      for (Index i = 0; i < 3; ++i) {
        xa(i) = ux(rng);
        xb(i) = ux(rng);
      }
      auto value_at = [&](const Vector& x) {
        ScalingPair s = ScalingPair::ones(bs);
        s.d(0) = std::exp(x(0));
        s.d(1) = std::exp(x(1));
        s.d_c = std::exp(x(2));
        const auto [row, col] = expand_scalings(s, bs);
        return sigma_max(ComplexMatrix(row.cwiseSqrt().cwiseInverse().asDiagonal() * M *
                                       col.cwiseSqrt().asDiagonal()));
      };
      const double fa = value_at(xa), fb = value_at(xb);
      const double fm = value_at(0.5 * (xa + xb));
      CHECK(fm <= 0.5 * (fa + fb) + 1e-9 * (fa + fb));
      ++checked;
    }
  }
  CHECK(checked == 1000);
}

TEST_CASE("mu_lower_bound_sample: degenerate and analytic cases") {
  BlockStructure single;
  single.subsystem_blocks = {{4, 4}};
  CHECK(mu_lower_bound_sample(ComplexMatrix::Zero(4, 4), single, 10) == 0.0);

  const ComplexMatrix M = randc(4, 4);
  const double lower = mu_lower_bound_sample(M, single, 2000);
  const double exact = sigma_max(M);  // mu = sigma_max for one full block
  CHECK(lower <= exact * (1 + 1e-12));
  CHECK(lower >= exact * 0.95);

  BlockStructure bs = two_scalars();
  ComplexMatrix A(2, 2);
  A << 0, 4, 1, 0;
  const double l2 = mu_lower_bound_sample(A, bs, 2000);
  CHECK(l2 <= 2.0 * (1 + 1e-12));
  CHECK(l2 >= 1.9);
}

TEST_CASE("mu_upper_bound: exact for a single full block") {
  BlockStructure bs;
  bs.subsystem_blocks = {{3, 5}};
  const ComplexMatrix M = randc(5, 3);
  const MuUpperResult res = mu_upper_bound(M, bs);
  CHECK(res.value == Catch::Approx(sigma_max(M)).epsilon(1e-6));
}

TEST_CASE("mu_upper_bound: antidiagonal two-scalar analytic value") {
  BlockStructure bs = two_scalars();
  ComplexMatrix M(2, 2);
  M << 0, 4, 1, 0;
  const MuUpperResult res = mu_upper_bound(M, bs);
  CHECK(res.value == Catch::Approx(2.0).epsilon(1e-4));
  // certificate reproduces the reported value
  CHECK(scaled_sv(M, res.scaling, bs) <= res.value * (1 + 1e-9));
}

TEST_CASE("mu_upper_bound: analytic sqrt(|ab|) over random antidiagonal draws") {
  BlockStructure bs = two_scalars();
  std::uniform_real_distribution<double> ua(0.05, 20.0);
  for (int trial = 0; trial < 100; ++trial) {
    ComplexMatrix M = ComplexMatrix::Zero(2, 2);
    const double a = ua(rng), b = ua(rng);
    M(0, 1) = a;
    M(1, 0) = b;
    const double want = std::sqrt(a * b);
    const MuUpperResult res = mu_upper_bound(M, bs);
    REQUIRE(res.value == Catch::Approx(want).epsilon(1e-4));
  }
}

TEST_CASE("mu_upper_bound: sandwich against the sampled lower bound") {
  for (int trial = 0; trial < 30; ++trial) {
    BlockStructure bs;
    const int k = 1 + trial % 3;
    for (int j = 0; j < k; ++j)
      bs.subsystem_blocks.push_back({1 + (trial + j) % 3, 1 + (trial + 2 * j) % 2});
    if (trial % 2) bs.performance_block = UncertainBlock{1 + trial % 2, 1};
    if (bs.block_count() < 2) bs.performance_block = UncertainBlock{2, 1};
    const ComplexMatrix M = randc(bs.row_dim(), bs.col_dim());
    const double upper = mu_upper_bound(M, bs).value;
    const double lower = mu_lower_bound_sample(M, bs, 400, 77 + trial);
    REQUIRE(lower <= upper * (1 + 1e-9));
  }
}

TEST_CASE("mu kernel: dimension validation") {
  BlockStructure bs = two_scalars();
  const ComplexMatrix M = randc(3, 2);
  CHECK_THROWS_AS(scaled_sv(M, ScalingPair::ones(bs), bs), DimensionError);
  CHECK_THROWS_AS(mu_upper_bound(M, bs), DimensionError);
  CHECK_THROWS_AS(mu_lower_bound_sample(M, bs, 10), DimensionError);
  BlockStructure empty;
  CHECK_THROWS_AS(validate(empty), InvalidArgument);
}
