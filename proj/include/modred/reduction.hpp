#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "modred/gramians.hpp"
#include "modred/state_space.hpp"

namespace modred {

/// Tail-sum convention for the balanced-truncation error bound.
///  - plain_tail_sum:          sum of the discarded Hankel values
///  - twice_distinct_tail_sum: twice the sum over distinct discarded values
///    (the convention with a full mathematical guarantee)
enum class BoundConvention { plain_tail_sum, twice_distinct_tail_sum };

inline std::string to_string(BoundConvention c) {
  return c == BoundConvention::plain_tail_sum ? "plain_tail_sum" : "twice_distinct_tail_sum";
}

struct ReductionResult {
  StateSpaceModel reduced;
  Vector hankel;                        // full singular-value array of the original
  std::optional<double> a_priori_bound; // absent for frequency-weighted truncation
  BoundConvention convention = BoundConvention::plain_tail_sum;
  bool tie_at_boundary = false;         // equal Hankel values straddle the cut
};

/// Error bound from the discarded tail sigma_{r+1}..sigma_n.
inline double a_priori_bound(const Vector& hankel, Index r, BoundConvention convention) {
  const Index n = hankel.size();
  if (r < 0 || r > n) throw InvalidArgument("a_priori_bound: order out of range");
  for (Index i = 0; i < n; ++i) {
    if (hankel(i) < 0.0) throw InvalidArgument("a_priori_bound: negative Hankel value");
    if (i > 0 && hankel(i) > hankel(i - 1) * (1.0 + 1e-12) + 1e-300)
      throw InvalidArgument("a_priori_bound: Hankel values must be nonincreasing");
  }
  if (convention == BoundConvention::plain_tail_sum) {
    double sum = 0.0;
    for (Index i = r; i < n; ++i) sum += hankel(i);
    return sum;
  }
  // Repeated values within the tail count once.
  double sum = 0.0;
  for (Index i = r; i < n; ++i) {
    if (i > r && hankel(i) >= hankel(i - 1) * (1.0 - 1e-10) - 1e-300) continue;
    sum += hankel(i);
  }
  return 2.0 * sum;
}

/// Square-root balancing basis computed once per (system, Gramian pair);
/// truncation to any order is then a cheap projection. Useful when one model
/// is reduced to many different orders.
class BalancedReducer {
 public:
  /// Plain balancing from the system's own Gramians.
  explicit BalancedReducer(StateSpaceModel sys) : sys_(std::move(sys)) {
    validate(sys_);
    require_stable(sys_, "BalancedReducer");
    const GramianPair g = gramians(sys_);
    init(g.P, g.Q);
  }

  /// Balancing against externally supplied Gramians (e.g. frequency-weighted).
  BalancedReducer(StateSpaceModel sys, const Matrix& P, const Matrix& Q)
      : sys_(std::move(sys)) {
    validate(sys_);
    init(P, Q);
  }

  const Vector& hankel() const { return hankel_; }
  const StateSpaceModel& system() const { return sys_; }

  ReductionResult truncate(Index r) const {
    const Index n = sys_.n();
    if (r < 0 || r > n)
      throw InvalidArgument("balanced truncation: order must satisfy 0 <= r <= n");
    ReductionResult result;
    result.hankel = hankel_;
    result.tie_at_boundary =
        r > 0 && r < n &&
        hankel_(r - 1) - hankel_(r) <= 1e-9 * std::max(hankel_(r - 1), 1e-300);
    if (r == 0) {
      result.reduced = StateSpaceModel::static_gain(sys_.D);
      return result;
    }
    if (!(hankel_(r - 1) > hankel_(0) * 1e-250))
      throw NumericalError("balanced truncation: requested order exceeds numerical rank");
    const Vector scale = hankel_.head(r).cwiseSqrt().cwiseInverse();
    const Matrix Tr = Lp_V_.leftCols(r) * scale.asDiagonal();
    const Matrix Li = scale.asDiagonal() * U_Lq_.topRows(r);
    result.reduced.A = Li * sys_.A * Tr;
    result.reduced.B = Li * sys_.B;
    result.reduced.C = sys_.C * Tr;
    result.reduced.D = sys_.D;
    return result;
  }

 private:
  void init(const Matrix& P, const Matrix& Q) {
    const Matrix Lp = psd_factor(P);
    const Matrix Lq = psd_factor(Q);
    Eigen::BDCSVD<Matrix> svd(Lq.transpose() * Lp,
                              Eigen::ComputeThinU | Eigen::ComputeThinV);
    hankel_ = svd.singularValues().cwiseMax(0.0);
    Lp_V_ = Lp * svd.matrixV();
    U_Lq_ = svd.matrixU().transpose() * Lq.transpose();
  }

  StateSpaceModel sys_;
  Vector hankel_;
  Matrix Lp_V_;  // Lp * V
  Matrix U_Lq_;  // U^T * Lq^T
};

/// Balanced truncation to order r with the tail-sum error bound.
inline ReductionResult balanced_truncate(const StateSpaceModel& sys, Index r,
                                         BoundConvention convention = BoundConvention::plain_tail_sum) {
  const BalancedReducer reducer(sys);
  ReductionResult result = reducer.truncate(r);
  result.convention = convention;
  result.a_priori_bound = a_priori_bound(result.hankel, r, convention);
  return result;
}

namespace detail {

// Broadcast a SISO weight across p channels (w(s) * I_p).
inline StateSpaceModel broadcast_weight(const StateSpaceModel& w, Index p) {
  std::vector<StateSpaceModel> copies(static_cast<std::size_t>(p), w);
  return blkdiag_assemble(copies);
}

}  // namespace detail

/// Frequency-weighted balanced truncation (output weighting, Enns):
/// controllability Gramian of the plant, observability Gramian of the
/// weighted cascade restricted to the plant states. A scalar weight is
/// broadcast across all output channels. No a priori error bound is attached.
inline ReductionResult fw_balanced_truncate(const StateSpaceModel& sys,
                                            const StateSpaceModel& output_weight, Index r) {
  validate(sys);
  validate(output_weight, "output_weight");
  require_stable(sys, "fw_balanced_truncate");
  require_stable(output_weight, "fw_balanced_truncate weight");
  if (r < 0 || r > sys.n())
    throw InvalidArgument("fw_balanced_truncate: order must satisfy 0 <= r <= n");

  StateSpaceModel weight = output_weight;
  if (weight.m() == 1 && weight.p() == 1 && sys.p() != 1)
    weight = detail::broadcast_weight(weight, sys.p());
  if (weight.m() != sys.p())
    throw DimensionError("fw_balanced_truncate: weight inputs must match system outputs");

  const StateSpaceModel cascade = series(sys, weight);
  const Matrix P = lyapunov_solve(sys.A, sys.B * sys.B.transpose());
  const Matrix Qcas =
      lyapunov_solve(cascade.A.transpose(), cascade.C.transpose() * cascade.C);
  const Matrix Qw = Qcas.topLeftCorner(sys.n(), sys.n());

  ReductionResult result = BalancedReducer(sys, P, Qw).truncate(r);
  result.a_priori_bound = std::nullopt;
  return result;
}

}  // namespace modred
