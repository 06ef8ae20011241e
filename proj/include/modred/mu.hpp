#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "modred/lmi.hpp"
#include "modred/state_space.hpp"

namespace modred {

/// One full complex uncertainty block Delta in C^{rows x cols}.
struct UncertainBlock {
  Index rows = 0;  // p_j for subsystem blocks, m_c for the performance block
  Index cols = 0;  // m_j for subsystem blocks, p_c for the performance block
};

/// Uncertainty set description: k full subsystem blocks Delta_j (p_j x m_j)
/// plus an optional performance block Delta_c (m_c x p_c).
///
/// A matrix M tested against this structure has rows indexed by the Delta
/// inputs (m_1, ..., m_k, p_c) and columns by the Delta outputs
/// (p_1, ..., p_k, m_c).
struct BlockStructure {
  std::vector<UncertainBlock> subsystem_blocks;
  std::optional<UncertainBlock> performance_block;

  Index block_count() const {
    return static_cast<Index>(subsystem_blocks.size()) + (performance_block ? 1 : 0);
  }
  Index row_dim() const {
    Index d = 0;
    for (const auto& b : subsystem_blocks) d += b.cols;
    if (performance_block) d += performance_block->cols;
    return d;
  }
  Index col_dim() const {
    Index d = 0;
    for (const auto& b : subsystem_blocks) d += b.rows;
    if (performance_block) d += performance_block->rows;
    return d;
  }
};

inline void validate(const BlockStructure& bs) {
  if (bs.block_count() == 0) throw InvalidArgument("BlockStructure: no blocks");
  for (const auto& b : bs.subsystem_blocks)
    if (b.rows < 1 || b.cols < 1)
      throw InvalidArgument("BlockStructure: block dims must be >= 1");
  if (bs.performance_block &&
      (bs.performance_block->rows < 1 || bs.performance_block->cols < 1))
    throw InvalidArgument("BlockStructure: performance block dims must be >= 1");
}

/// One positive scalar per uncertainty block; one entry is pinned to 1
/// (multiplying all entries by a common factor leaves the scaled singular
/// value unchanged).
struct ScalingPair {
  Vector d;                   // size k, subsystem block scalings
  double d_c = 1.0;           // performance block scaling
  Index normalized_index = 0; // 0..k-1 for a subsystem entry, k for d_c

  static ScalingPair ones(const BlockStructure& bs) {
    ScalingPair s;
    s.d = Vector::Ones(static_cast<Index>(bs.subsystem_blocks.size()));
    s.d_c = 1.0;
    s.normalized_index = bs.performance_block
                             ? static_cast<Index>(bs.subsystem_blocks.size())
                             : Index{0};
    return s;
  }
};

inline void validate(const ScalingPair& s, const BlockStructure& bs) {
  if (s.d.size() != static_cast<Index>(bs.subsystem_blocks.size()))
    throw DimensionError("ScalingPair: wrong number of scalings");
  if ((s.d.array() <= 0.0).any() || !(s.d_c > 0.0))
    throw InvalidArgument("ScalingPair: scalings must be strictly positive");
  const Index k = s.d.size();
  const double pinned = (s.normalized_index == k) ? s.d_c : s.d(s.normalized_index);
  if (pinned != 1.0)
    throw InvalidArgument("ScalingPair: normalized entry must equal exactly 1");
}

/// Diagonals of the scaling matrices sized to M's rows and columns: the row
/// scaling repeats d_j over the Delta-input dims (m_j, then p_c), the column
/// scaling over the Delta-output dims (p_j, then m_c).
inline std::pair<Vector, Vector> expand_scalings(const ScalingPair& s,
                                                 const BlockStructure& bs) {
  Vector row(bs.row_dim()), col(bs.col_dim());
  Index r = 0, c = 0;
  for (std::size_t j = 0; j < bs.subsystem_blocks.size(); ++j) {
    row.segment(r, bs.subsystem_blocks[j].cols).setConstant(s.d(static_cast<Index>(j)));
    col.segment(c, bs.subsystem_blocks[j].rows).setConstant(s.d(static_cast<Index>(j)));
    r += bs.subsystem_blocks[j].cols;
    c += bs.subsystem_blocks[j].rows;
  }
  if (bs.performance_block) {
    row.segment(r, bs.performance_block->cols).setConstant(s.d_c);
    col.segment(c, bs.performance_block->rows).setConstant(s.d_c);
  }
  return {row, col};
}

/// sigma_max(D_row^{-1/2} M D_col^{1/2}).
inline double scaled_sv(const ComplexMatrix& M, const ScalingPair& s,
                        const BlockStructure& bs) {
  validate(bs);
  if (M.rows() != bs.row_dim() || M.cols() != bs.col_dim())
    throw DimensionError("scaled_sv: M does not match the block structure");
  const auto [row, col] = expand_scalings(s, bs);
  const ComplexMatrix scaled = row.cwiseSqrt().cwiseInverse().asDiagonal() * M *
                               col.cwiseSqrt().asDiagonal();
  return sigma_max(scaled);
}

/// Sampled lower bound: mu >= rho(M * Delta) for every structured Delta with
/// sigma_max(Delta) = 1, so the max over sampled unit-norm structured
/// directions is a valid lower bound. Each sample is sharpened by a few
/// alignment steps (polar factor of the spectral-radius gradient per block),
/// which stays inside the admissible set and only raises the bound.
inline double mu_lower_bound_sample(const ComplexMatrix& M, const BlockStructure& bs,
                                    int samples, std::uint64_t seed = 12345) {
  validate(bs);
  if (M.rows() != bs.row_dim() || M.cols() != bs.col_dim())
    throw DimensionError("mu_lower_bound_sample: M does not match the structure");
  if (samples < 1) throw InvalidArgument("mu_lower_bound_sample: samples >= 1 required");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_block = [&](Index rows, Index cols) {
    ComplexMatrix B(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) B(i, j) = Complex(gauss(rng), gauss(rng));
    const double s = sigma_max(B);
    if (s > 0) B /= s;
    return B;
  };
  auto polar_factor = [](const ComplexMatrix& G) {
    Eigen::JacobiSVD<ComplexMatrix> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return ComplexMatrix(svd.matrixU() * svd.matrixV().adjoint());
  };

  std::vector<UncertainBlock> blocks = bs.subsystem_blocks;
  if (bs.performance_block) blocks.push_back(*bs.performance_block);

  double best = 0.0;
  ComplexMatrix Delta = ComplexMatrix::Zero(bs.col_dim(), bs.row_dim());
  for (int t = 0; t < samples; ++t) {
    Delta.setZero();
    Index r = 0, c = 0;
    for (const auto& b : blocks) {
      Delta.block(r, c, b.rows, b.cols) = random_block(b.rows, b.cols);
      r += b.rows;
      c += b.cols;
    }
    for (int refine = 0; refine < 3; ++refine) {
      const ComplexMatrix MD = M * Delta;
      Eigen::ComplexEigenSolver<ComplexMatrix> es(MD);
      if (es.info() != Eigen::Success) break;
      Index idx = 0;
      es.eigenvalues().cwiseAbs().maxCoeff(&idx);
      const double rho = std::abs(es.eigenvalues()(idx));
      best = std::max(best, rho);
      if (rho == 0.0) break;
      // left/right eigenvectors give the eigenvalue gradient wrt Delta
      const ComplexVector x = es.eigenvectors().col(idx);
      Eigen::ComplexEigenSolver<ComplexMatrix> esl(MD.adjoint());
      if (esl.info() != Eigen::Success) break;
      Index lidx = 0;
      (esl.eigenvalues().array() - std::conj(es.eigenvalues()(idx)))
          .cwiseAbs()
          .minCoeff(&lidx);
      const ComplexVector y = esl.eigenvectors().col(lidx);
      const ComplexMatrix G = (M.adjoint() * y) * x.adjoint();
      Index rr = 0, cc = 0;
      for (const auto& b : blocks) {
        const ComplexMatrix Gb = G.block(rr, cc, b.rows, b.cols);
        if (Gb.norm() > 1e-14 * (1.0 + G.norm()))
          Delta.block(rr, cc, b.rows, b.cols) = polar_factor(Gb);
        rr += b.rows;
        cc += b.cols;
      }
    }
    const double rho_final = (M * Delta).eigenvalues().cwiseAbs().maxCoeff();
    best = std::max(best, rho_final);
  }
  return best;
}

struct MuUpperResult {
  double value = 0.0;
  ScalingPair scaling;
  bool converged = true;
};

/// D-scaling upper bound on the structured singular value:
/// min over scalings of sigma_max(D_row^{-1/2} M D_col^{1/2}), found by
/// bisection on the level with the shared LMI feasibility kernel.
inline MuUpperResult mu_upper_bound(const ComplexMatrix& M, const BlockStructure& bs,
                                    double rel_tol = 1e-6,
                                    const InnerMaxOptions& inner = {}) {
  validate(bs);
  if (M.rows() != bs.row_dim() || M.cols() != bs.col_dim())
    throw DimensionError("mu_upper_bound: M does not match the block structure");

  MuUpperResult result;
  result.scaling = ScalingPair::ones(bs);
  const double sv_unit = scaled_sv(M, result.scaling, bs);
  result.value = sv_unit;
  if (bs.block_count() <= 1 || sv_unit == 0.0) return result;  // exact already

  // Free scalings: every block except the pinned one. Feasibility of level g:
  //   exists d > 0 : M D_col M^H < g^2 D_row.
  const Index k = static_cast<Index>(bs.subsystem_blocks.size());
  const Index pinned = result.scaling.normalized_index;

  std::vector<Index> free_idx;
  for (Index j = 0; j < bs.block_count(); ++j)
    if (j != pinned) free_idx.push_back(j);

  // Row/column index runs per block, in structure order (subsystems, perf).
  std::vector<std::pair<Index, Index>> row_runs, col_runs;
  {
    Index r = 0, c = 0;
    for (const auto& b : bs.subsystem_blocks) {
      row_runs.push_back({r, b.cols});
      col_runs.push_back({c, b.rows});
      r += b.cols;
      c += b.rows;
    }
    if (bs.performance_block) {
      row_runs.push_back({r, bs.performance_block->cols});
      col_runs.push_back({c, bs.performance_block->rows});
    }
  }

  auto gram_term = [&](Index block) {
    const auto [c0, clen] = col_runs[static_cast<std::size_t>(block)];
    const ComplexMatrix Mj = M.middleCols(c0, clen);
    return ComplexMatrix(Mj * Mj.adjoint());
  };
  auto row_identity = [&](Index block) {
    ComplexMatrix E = ComplexMatrix::Zero(M.rows(), M.rows());
    const auto [r0, rlen] = row_runs[static_cast<std::size_t>(block)];
    E.block(r0, r0, rlen, rlen).setIdentity();
    return E;
  };

  auto feasibility_family = [&](double level) {
    AffineHermitianFamily fam;
    fam.F0 = level * level * row_identity(pinned) - gram_term(pinned);
    for (Index j : free_idx)
      fam.terms.push_back(level * level * row_identity(j) - gram_term(j));
    return fam;
  };

  std::vector<Vector> warm;
  auto feasible = [&](double level) -> std::optional<InnerMaxResult> {
    InnerMaxResult r = maximize_lambda_min(feasibility_family(level), warm, inner);
    if (r.lambda_min > 0.0) {
      if (r.d.size()) warm.assign(1, r.d);
      return r;
    }
    return std::nullopt;
  };

  double hi = sv_unit * (1.0 + 1e-12);  // feasible by construction (d = 1)
  double lo = hi / 64.0;
  std::optional<InnerMaxResult> hi_cert = feasible(hi);
  int guard = 0;
  while (auto r = feasible(lo)) {
    hi = lo;
    hi_cert = r;
    lo /= 64.0;
    if (++guard > 200 || hi < 1e-280) break;
  }
  if (!hi_cert) {  // numerical edge: fall back to the unscaled value
    result.converged = false;
    return result;
  }
  while (hi - lo > rel_tol * hi) {
    const double mid = std::sqrt(hi * lo);
    if (auto r = feasible(mid)) {
      hi = mid;
      hi_cert = r;
    } else {
      lo = mid;
    }
  }

  ScalingPair s = ScalingPair::ones(bs);
  for (std::size_t t = 0; t < free_idx.size(); ++t) {
    const Index j = free_idx[t];
    const double dj = hi_cert->d(static_cast<Index>(t));
    if (j < k)
      s.d(j) = dj;
    else
      s.d_c = dj;
  }
  result.scaling = s;
  result.value = std::min(sv_unit, scaled_sv(M, s, bs));
  return result;
}

}  // namespace modred
