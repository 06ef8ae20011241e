#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>
#include <vector>

#include "modred/state_space.hpp"

namespace modred {

/// Evaluates G(iw) = C (iwI - A)^{-1} B + D repeatedly for one system.
///
/// A is reduced once; every evaluation is then a cheap structured solve.
/// The state graph of A is split into connected components: components whose
/// sub-block is tridiagonal (e.g. modal 2x2 chains and their block-diagonal
/// assemblies) use an O(n) banded solve, all others one Hessenberg reduction
/// up front and an O(n^2) Hessenberg solve per frequency.
class FrequencyResponseEvaluator {
 public:
  explicit FrequencyResponseEvaluator(const StateSpaceModel& sys) {
    validate(sys);
    D_ = sys.D;
    m_ = sys.m();
    p_ = sys.p();
    const Index n = sys.n();
    if (n == 0) return;

    // Connected components of the sparsity graph of A (symmetrized).
    std::vector<Index> parent(n);
    std::iota(parent.begin(), parent.end(), Index{0});
    auto find = [&](Index i) {
      while (parent[i] != i) i = parent[i] = parent[parent[i]];
      return i;
    };
    auto unite = [&](Index a, Index b) { parent[find(a)] = find(b); };
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (i != j && (sys.A(i, j) != 0.0 || sys.A(j, i) != 0.0)) unite(i, j);

    std::vector<std::vector<Index>> groups(n);
    for (Index i = 0; i < n; ++i) groups[find(i)].push_back(i);

    for (auto& g : groups) {
      if (g.empty()) continue;
      Component comp;
      comp.idx = std::move(g);
      const Index nc = static_cast<Index>(comp.idx.size());
      Matrix Ac(nc, nc);
      for (Index r = 0; r < nc; ++r)
        for (Index c = 0; c < nc; ++c) Ac(r, c) = sys.A(comp.idx[r], comp.idx[c]);
      comp.Bc.resize(nc, m_);
      for (Index r = 0; r < nc; ++r) comp.Bc.row(r) = sys.B.row(comp.idx[r]);
      comp.Cc.resize(p_, nc);
      for (Index c = 0; c < nc; ++c) comp.Cc.col(c) = sys.C.col(comp.idx[c]);

      Index bandwidth = 0;
      for (Index r = 0; r < nc; ++r)
        for (Index c = 0; c < nc; ++c)
          if (Ac(r, c) != 0.0) bandwidth = std::max(bandwidth, std::abs(r - c));
      comp.tridiagonal = bandwidth <= 1;
      if (comp.tridiagonal) {
        comp.H = std::move(Ac);  // band entries read directly
      } else {
        Eigen::HessenbergDecomposition<Matrix> hd(Ac);
        comp.H = hd.matrixH();
        const Matrix Q = hd.matrixQ();
        comp.Bc = (Q.transpose() * comp.Bc).eval();
        comp.Cc = (comp.Cc * Q).eval();
      }
      comps_.push_back(std::move(comp));
    }
  }

  Index inputs() const { return m_; }
  Index outputs() const { return p_; }

  /// G(iw); throws SingularResolventError when iw is (numerically) a pole.
  ComplexMatrix operator()(double omega) const {
    ComplexMatrix Y = D_.cast<Complex>();
    const Complex s(0.0, omega);
    for (const auto& comp : comps_) {
      ComplexMatrix X = comp.Bc.cast<Complex>();
      if (comp.tridiagonal)
        solve_tridiagonal(comp, s, X, omega);
      else
        solve_hessenberg(comp, s, X, omega);
      Y.noalias() += comp.Cc * X;
    }
    return Y;
  }

 private:
  struct Component {
    std::vector<Index> idx;
    bool tridiagonal = false;
    Matrix H;   // tridiagonal A block, or its Hessenberg form
    Matrix Bc;  // B rows (transformed for the Hessenberg path)
    Matrix Cc;  // C cols (transformed for the Hessenberg path)
    mutable ComplexVector eigenvalues;  // lazily filled on failure
  };

  [[noreturn]] void fail_singular(const Component& comp, double omega) const {
    if (comp.eigenvalues.size() == 0)
      comp.eigenvalues = Eigen::EigenSolver<Matrix>(comp.H).eigenvalues();
    const Complex s(0.0, omega);
    Index best = 0;
    for (Index i = 1; i < comp.eigenvalues.size(); ++i)
      if (std::abs(comp.eigenvalues(i) - s) < std::abs(comp.eigenvalues(best) - s))
        best = i;
    std::ostringstream msg;
    msg << "resolvent nearly singular at omega=" << omega << ": eigenvalue "
        << comp.eigenvalues(best).real() << (comp.eigenvalues(best).imag() < 0 ? "-" : "+")
        << std::abs(comp.eigenvalues(best).imag()) << "i lies within tolerance of i*omega";
    throw SingularResolventError(msg.str(), omega, comp.eigenvalues(best));
  }

  // A pivot signals a (near-)singular resolvent when it is the result of
  // catastrophic cancellation: tiny against the magnitudes that produced it.
  // Comparing against the running cancellation scale (not a global matrix
  // norm) keeps wide-dynamic-range systems (e.g. modal models spanning many
  // decades of frequency) evaluable while still catching |iw - lambda| -> 0.
  static constexpr double kCancelTol = 1e-13;

  // Thomas-style elimination with partial pivoting; pivoting widens the
  // upper band to two, handled by the extra `up2` diagonal.
  void solve_tridiagonal(const Component& comp, Complex s, ComplexMatrix& X,
                         double omega) const {
    const Index nc = comp.H.rows();
    if (nc == 1) {
      const Complex piv = s - comp.H(0, 0);
      if (std::abs(piv) <= kCancelTol * (std::abs(s) + std::abs(comp.H(0, 0))))
        fail_singular(comp, omega);
      X.row(0) /= piv;
      return;
    }
    ComplexVector dia(nc), up1(nc), up2(nc);
    Vector born(nc);  // magnitude of the operands that formed dia(i)
    for (Index i = 0; i < nc; ++i) {
      dia(i) = s - comp.H(i, i);
      born(i) = std::abs(s) + std::abs(comp.H(i, i));
      if (i + 1 < nc) up1(i) = -comp.H(i, i + 1);
      if (i + 2 < nc) up2(i) = 0.0;
    }
    for (Index i = 0; i + 1 < nc; ++i) {
      Complex low = -comp.H(i + 1, i);
      double low_born = std::abs(low);
      if (std::abs(low) > std::abs(dia(i))) {
        std::swap(dia(i), low);
        std::swap(born(i), low_born);
        std::swap(up1(i), dia(i + 1));
        if (i + 2 < nc) {
          up2(i) = up1(i + 1);
          up1(i + 1) = 0.0;
        }
        X.row(i).swap(X.row(i + 1));
      }
      if (std::abs(dia(i)) <= kCancelTol * born(i)) fail_singular(comp, omega);
      const Complex f = low / dia(i);
      born(i + 1) = std::abs(dia(i + 1)) + std::abs(f * up1(i));
      dia(i + 1) -= f * up1(i);
      if (i + 2 < nc) up1(i + 1) -= f * up2(i);
      X.row(i + 1) -= f * X.row(i);
    }
    if (std::abs(dia(nc - 1)) <= kCancelTol * born(nc - 1)) fail_singular(comp, omega);
    X.row(nc - 1) /= dia(nc - 1);
    for (Index i = nc - 2; i >= 0; --i) {
      X.row(i) -= up1(i) * X.row(i + 1);
      if (i + 2 < nc) X.row(i) -= up2(i) * X.row(i + 2);
      X.row(i) /= dia(i);
    }
  }

  void solve_hessenberg(const Component& comp, Complex s, ComplexMatrix& X,
                        double omega) const {
    const Index nc = comp.H.rows();
    ComplexMatrix U = (-comp.H).cast<Complex>();
    U.diagonal().array() += s;
    Vector born(nc);
    for (Index i = 0; i < nc; ++i) born(i) = std::abs(s) + std::abs(comp.H(i, i));
    for (Index j = 0; j + 1 < nc; ++j) {
      if (std::abs(U(j + 1, j)) > std::abs(U(j, j))) {
        U.row(j).tail(nc - j).swap(U.row(j + 1).tail(nc - j));
        born(j) = std::abs(U(j, j));
        X.row(j).swap(X.row(j + 1));
      }
      if (std::abs(U(j, j)) <= kCancelTol * born(j)) fail_singular(comp, omega);
      const Complex f = U(j + 1, j) / U(j, j);
      born(j + 1) = std::abs(U(j + 1, j + 1)) + std::abs(f * U(j, j + 1));
      U.row(j + 1).tail(nc - j - 1) -= f * U.row(j).tail(nc - j - 1);
      X.row(j + 1) -= f * X.row(j);
    }
    if (std::abs(U(nc - 1, nc - 1)) <= kCancelTol * born(nc - 1))
      fail_singular(comp, omega);
    X.row(nc - 1) /= U(nc - 1, nc - 1);
    for (Index i = nc - 2; i >= 0; --i) {
      X.row(i).noalias() -= U.row(i).tail(nc - i - 1) * X.bottomRows(nc - i - 1);
      X.row(i) /= U(i, i);
    }
  }

  Matrix D_;
  Index m_ = 0, p_ = 0;
  std::vector<Component> comps_;
};

/// One-shot frequency response C (iwI - A)^{-1} B + D at omega > 0.
/// For sweeps construct a FrequencyResponseEvaluator instead.
inline ComplexMatrix freq_response(const StateSpaceModel& sys, double omega) {
  if (!(omega > 0.0) || !std::isfinite(omega))
    throw InvalidArgument("freq_response: omega must be positive and finite");
  return FrequencyResponseEvaluator(sys)(omega);
}

}  // namespace modred
