#pragma once

#include <Eigen/Dense>
#include <numeric>
#include <utility>
#include <vector>

#include "modred/freq_response.hpp"
#include "modred/stability.hpp"
#include "modred/state_space.hpp"

namespace modred {

/// Static interconnection [u_b; y_c] = K [y_b; u_c], partitioned into the
/// four blocks with per-subsystem I/O dimension bookkeeping.
struct InterconnectionMatrix {
  Matrix K11;  // m_b x p_b
  Matrix K12;  // m_b x m_c
  Matrix K21;  // p_c x p_b
  Matrix K22;  // p_c x m_c
  std::vector<Index> input_dims;   // m_j per subsystem
  std::vector<Index> output_dims;  // p_j per subsystem

  Index mb() const { return K11.rows(); }
  Index pb() const { return K11.cols(); }
  Index mc() const { return K12.cols(); }
  Index pc() const { return K21.rows(); }
  std::size_t subsystem_count() const { return input_dims.size(); }

  Matrix full() const {
    Matrix K(mb() + pc(), pb() + mc());
    K << K11, K12, K21, K22;
    return K;
  }

  static InterconnectionMatrix from_full(const Matrix& K, std::vector<Index> input_dims,
                                         std::vector<Index> output_dims) {
    const Index mb = std::accumulate(input_dims.begin(), input_dims.end(), Index{0});
    const Index pb = std::accumulate(output_dims.begin(), output_dims.end(), Index{0});
    if (K.rows() < mb || K.cols() < pb)
      throw DimensionError("InterconnectionMatrix: K smaller than subsystem dims");
    InterconnectionMatrix k;
    const Index pc = K.rows() - mb, mc = K.cols() - pb;
    k.K11 = K.topLeftCorner(mb, pb);
    k.K12 = K.topRightCorner(mb, mc);
    k.K21 = K.bottomLeftCorner(pc, pb);
    k.K22 = K.bottomRightCorner(pc, mc);
    k.input_dims = std::move(input_dims);
    k.output_dims = std::move(output_dims);
    return k;
  }
};

inline void validate(const InterconnectionMatrix& k) {
  const Index mb = std::accumulate(k.input_dims.begin(), k.input_dims.end(), Index{0});
  const Index pb = std::accumulate(k.output_dims.begin(), k.output_dims.end(), Index{0});
  if (k.input_dims.size() != k.output_dims.size())
    throw DimensionError("InterconnectionMatrix: dim lists differ in length");
  for (Index d : k.input_dims)
    if (d < 0) throw DimensionError("InterconnectionMatrix: negative input dim");
  for (Index d : k.output_dims)
    if (d < 0) throw DimensionError("InterconnectionMatrix: negative output dim");
  if (k.K11.rows() != mb || k.K11.cols() != pb)
    throw DimensionError("InterconnectionMatrix: K11 must be m_b x p_b");
  if (k.K12.rows() != mb) throw DimensionError("InterconnectionMatrix: K12 row mismatch");
  if (k.K21.cols() != pb) throw DimensionError("InterconnectionMatrix: K21 col mismatch");
  if (k.K22.rows() != k.K21.rows() || k.K22.cols() != k.K12.cols())
    throw DimensionError("InterconnectionMatrix: K22 block mismatch");
  for (const Matrix* m : {&k.K11, &k.K12, &k.K21, &k.K22})
    if (!m->allFinite()) throw InvalidArgument("InterconnectionMatrix: non-finite entry");
}

/// Subsystems plus their static interconnection; immutable after construction.
class CoupledSystem {
 public:
  CoupledSystem(std::vector<StateSpaceModel> subsystems, InterconnectionMatrix K)
      : subsystems_(std::move(subsystems)), K_(std::move(K)) {
    validate(K_);
    if (subsystems_.size() != K_.subsystem_count())
      throw DimensionError("CoupledSystem: subsystem count does not match K");
    for (std::size_t j = 0; j < subsystems_.size(); ++j) {
      validate(subsystems_[j], "subsystem " + std::to_string(j));
      if (subsystems_[j].m() != K_.input_dims[j] || subsystems_[j].p() != K_.output_dims[j])
        throw DimensionError("CoupledSystem: subsystem " + std::to_string(j) +
                             " I/O dims disagree with K bookkeeping");
    }
    block_diagonal_ = blkdiag_assemble(subsystems_);
  }

  const std::vector<StateSpaceModel>& subsystems() const { return subsystems_; }
  const InterconnectionMatrix& K() const { return K_; }
  const StateSpaceModel& block_diagonal() const { return block_diagonal_; }

 private:
  std::vector<StateSpaceModel> subsystems_;
  InterconnectionMatrix K_;
  StateSpaceModel block_diagonal_;
};

struct WellPosedness {
  bool ok = false;
  double condition_number = std::numeric_limits<double>::infinity();
};

/// The algebraic loop I - K11 D_b must be invertible; checked by singular
/// values with a relative cutoff.
inline WellPosedness check_wellposed(const CoupledSystem& cs) {
  const Matrix S = Matrix::Identity(cs.K().mb(), cs.K().mb()) -
                   cs.K().K11 * cs.block_diagonal().D;
  const Vector sv = S.jacobiSvd().singularValues();
  const double smax = sv.size() ? sv(0) : 1.0;
  const double smin = sv.size() ? sv(sv.size() - 1) : 1.0;
  WellPosedness wp;
  wp.ok = smin > 1e-10 * smax;
  wp.condition_number = (smin > 0.0) ? smax / smin : std::numeric_limits<double>::infinity();
  return wp;
}

namespace detail {

struct LoopFactors {
  Matrix Phi;  // (I - K11 D_b)^{-1}
  Matrix Psi;  // (I - D_b K11)^{-1}
};

inline LoopFactors loop_factors(const CoupledSystem& cs) {
  const WellPosedness wp = check_wellposed(cs);
  if (!wp.ok)
    throw IllPosedError("interconnection is ill-posed: I - K11*D_b is singular "
                        "(condition number " + std::to_string(wp.condition_number) + ")",
                        wp.condition_number);
  const Matrix& Db = cs.block_diagonal().D;
  const Matrix& K11 = cs.K().K11;
  LoopFactors f;
  f.Phi = (Matrix::Identity(K11.rows(), K11.rows()) - K11 * Db).partialPivLu().inverse();
  f.Psi = (Matrix::Identity(Db.rows(), Db.rows()) - Db * K11).partialPivLu().inverse();
  return f;
}

}  // namespace detail

/// Closed interconnection G_c = K21 G_b (I - K11 G_b)^{-1} K12 + K22 as one
/// realization on the stacked subsystem state.
inline StateSpaceModel upper_lft_gc(const CoupledSystem& cs) {
  const auto [Phi, Psi] = detail::loop_factors(cs);
  const StateSpaceModel& gb = cs.block_diagonal();
  const Matrix& K11 = cs.K().K11;
  StateSpaceModel gc;
  gc.A = gb.A + gb.B * Phi * K11 * gb.C;
  gc.B = gb.B * Phi * cs.K().K12;
  gc.C = cs.K().K21 * Psi * gb.C;
  gc.D = cs.K().K21 * Psi * gb.D * cs.K().K12 + cs.K().K22;
  return gc;
}

/// Nominal error-propagation system N mapping (e_b, u_c) -> (u_b_hat, e_c):
///   N11 = K11 (I - G_b K11)^{-1}     N12 = (I - K11 G_b)^{-1} K12
///   N21 = K21 (I - G_b K11)^{-1}     N22 = 0
///
/// The e_c output must not see u_c at all, and N11/N21 share poles with
/// N12 only through the loop; the realization therefore carries two copies
/// of the closed-loop state, one driven by e_b and one by u_c (the McMillan
/// degree of N is 2n whenever K11 != 0, so one copy cannot suffice).
/// For K11 == 0 the system is the static matrix [[0, K12], [K21, 0]].
inline StateSpaceModel nominal_n(const CoupledSystem& cs) {
  const Matrix& K11 = cs.K().K11;
  const Index mb = cs.K().mb(), pb = cs.K().pb();
  const Index mc = cs.K().mc(), pc = cs.K().pc();
  if (K11.cwiseAbs().maxCoeff() == 0.0) {
    Matrix D = Matrix::Zero(mb + pc, pb + mc);
    D.topRightCorner(mb, mc) = cs.K().K12;
    D.bottomLeftCorner(pc, pb) = cs.K().K21;
    return StateSpaceModel::static_gain(D);
  }
  const auto [Phi, Psi] = detail::loop_factors(cs);
  const StateSpaceModel& gb = cs.block_diagonal();
  const Index n = gb.n();
  const Matrix Acl = gb.A + gb.B * Phi * K11 * gb.C;
  const Matrix PhiK11C = Phi * K11 * gb.C;  // m_b x n
  const Matrix K21Psi = cs.K().K21 * Psi;   // p_c x p_b

  StateSpaceModel N;
  N.A = Matrix::Zero(2 * n, 2 * n);
  N.A.topLeftCorner(n, n) = Acl;
  N.A.bottomRightCorner(n, n) = Acl;
  N.B = Matrix::Zero(2 * n, pb + mc);
  N.B.topLeftCorner(n, pb) = gb.B * Phi * K11;        // e_b drives copy 1
  N.B.bottomRightCorner(n, mc) = gb.B * Phi * cs.K().K12;  // u_c drives copy 2
  N.C = Matrix::Zero(mb + pc, 2 * n);
  N.C.topLeftCorner(mb, n) = PhiK11C;
  N.C.topRightCorner(mb, n) = PhiK11C;
  N.C.bottomLeftCorner(pc, n) = K21Psi * gb.C;
  N.D = Matrix::Zero(mb + pc, pb + mc);
  N.D.topLeftCorner(mb, pb) = Phi * K11;
  N.D.topRightCorner(mb, mc) = Phi * cs.K().K12;
  N.D.bottomLeftCorner(pc, pb) = K21Psi;
  return N;
}

/// Internal stability of the closed loop: the closed-loop state matrix must
/// be Hurwitz. Requires well-posedness.
inline bool check_internal_stability(const CoupledSystem& cs) {
  const auto [Phi, Psi] = detail::loop_factors(cs);
  const StateSpaceModel& gb = cs.block_diagonal();
  if (gb.n() == 0) return true;
  const Matrix Acl = gb.A + gb.B * Phi * cs.K().K11 * gb.C;
  return stability_report(Acl).stable;
}

/// Difference system E_c = G_c_hat - G_c for two coupled systems sharing the
/// same interconnection.
inline StateSpaceModel error_system_ec(const CoupledSystem& cs, const CoupledSystem& cs_hat) {
  const Matrix K1 = cs.K().full();
  const Matrix K2 = cs_hat.K().full();
  if (K1.rows() != K2.rows() || K1.cols() != K2.cols() || (K1 - K2).cwiseAbs().maxCoeff() != 0.0)
    throw InvalidArgument("error_system_ec: interconnection matrices differ");
  if (cs.K().input_dims != cs_hat.K().input_dims ||
      cs.K().output_dims != cs_hat.K().output_dims)
    throw DimensionError("error_system_ec: subsystem dimension bookkeeping differs");
  return parallel_diff(upper_lft_gc(cs), upper_lft_gc(cs_hat));
}

/// Evaluates N(iw) directly from per-subsystem frequency responses and the
/// interconnection algebra; one small dense inverse per frequency. This is
/// how the budget solvers consume N over thousands of grid points.
class NominalEvaluator {
 public:
  explicit NominalEvaluator(const CoupledSystem& cs) : K_(cs.K()) {
    subs_.reserve(cs.subsystems().size());
    for (const auto& sys : cs.subsystems()) subs_.emplace_back(sys);
  }

  Index rows() const { return K_.mb() + K_.pc(); }
  Index cols() const { return K_.pb() + K_.mc(); }
  const InterconnectionMatrix& K() const { return K_; }

  /// Block-diagonal G_b(iw).
  ComplexMatrix gb(double omega) const {
    ComplexMatrix G = ComplexMatrix::Zero(K_.pb(), K_.mb());
    Index ro = 0, co = 0;
    for (std::size_t j = 0; j < subs_.size(); ++j) {
      G.block(ro, co, K_.output_dims[j], K_.input_dims[j]) = subs_[j](omega);
      ro += K_.output_dims[j];
      co += K_.input_dims[j];
    }
    return G;
  }

  /// Full N(iw), rows (u_b_hat, e_c), cols (e_b, u_c).
  ComplexMatrix operator()(double omega) const {
    const ComplexMatrix G = gb(omega);
    const ComplexMatrix loop =
        ComplexMatrix::Identity(K_.pb(), K_.pb()) - G * K_.K11.cast<Complex>();
    Eigen::FullPivLU<ComplexMatrix> lu(loop);
    if (!lu.isInvertible())
      throw NumericalError("NominalEvaluator: I - G_b K11 singular at omega=" +
                           std::to_string(omega));
    const ComplexMatrix Theta = lu.inverse();
    ComplexMatrix N = ComplexMatrix::Zero(rows(), cols());
    const ComplexMatrix K11Theta = K_.K11.cast<Complex>() * Theta;
    N.topLeftCorner(K_.mb(), K_.pb()) = K11Theta;
    N.topRightCorner(K_.mb(), K_.mc()) =
        K_.K12.cast<Complex>() + K11Theta * G * K_.K12.cast<Complex>();
    N.bottomLeftCorner(K_.pc(), K_.pb()) = K_.K21.cast<Complex>() * Theta;
    return N;
  }

 private:
  InterconnectionMatrix K_;
  std::vector<FrequencyResponseEvaluator> subs_;
};

}  // namespace modred
