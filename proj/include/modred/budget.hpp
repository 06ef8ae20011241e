#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "modred/hinf.hpp"
#include "modred/interconnect.hpp"
#include "modred/lmi.hpp"
#include "modred/mu.hpp"
#include "modred/parallel.hpp"

namespace modred {

/// Scalar error levels per subsystem plus the performance channel, either
/// global constants or per-grid-point arrays.
struct WeightProfile {
  enum class Kind { global, per_frequency };
  Kind kind = Kind::global;
  std::vector<Vector> subsystem_levels;  // k entries, each length 1 or grid size
  Vector performance_level;              // length 0 (unused), 1, or grid size
  FrequencyGrid grid;

  static WeightProfile global_levels(Vector eps_j, double eps_c = 0.0) {
    WeightProfile p;
    p.kind = Kind::global;
    for (Index j = 0; j < eps_j.size(); ++j)
      p.subsystem_levels.push_back(Vector::Constant(1, eps_j(j)));
    p.performance_level = Vector::Constant(1, eps_c);
    return p;
  }

  double eps_subsystem(std::size_t j, std::size_t grid_index) const {
    const Vector& v = subsystem_levels[j];
    return v.size() == 1 ? v(0) : v(static_cast<Index>(grid_index));
  }
  double eps_performance(std::size_t grid_index) const {
    return performance_level.size() == 1 ? performance_level(0)
                                         : performance_level(static_cast<Index>(grid_index));
  }
};

inline void validate(const WeightProfile& p, std::size_t k, std::size_t grid_size) {
  if (p.subsystem_levels.size() != k)
    throw DimensionError("WeightProfile: expected " + std::to_string(k) + " subsystem levels");
  for (const auto& v : p.subsystem_levels) {
    if (v.size() != 1 && v.size() != static_cast<Index>(grid_size))
      throw DimensionError("WeightProfile: level array length must match grid");
    if ((v.array() < 0.0).any())
      throw InvalidArgument("WeightProfile: levels must be nonnegative");
  }
  if (p.performance_level.size() > 1 &&
      p.performance_level.size() != static_cast<Index>(grid_size))
    throw DimensionError("WeightProfile: performance array length must match grid");
}

struct FrequencyPoint {
  double omega = 0.0;
  bool feasible = false;
  std::optional<double> value;
  std::optional<ScalingPair> certificate;
  double certificate_margin = 0.0;
  bool bracket_edge = false;
};

struct SolverStats {
  std::size_t points = 0;
  std::size_t infeasible_points = 0;
  double elapsed_seconds = 0.0;
};

struct BoundResult {
  std::vector<FrequencyPoint> per_frequency;
  std::optional<double> global_value;
  std::optional<double> global_omega;
  bool wellposed_stable_certified = false;
  SolverStats stats;
};

struct BudgetOptions {
  GammaLmiOptions lmi;
  std::size_t chunks = 16;            // fixed chunking keeps results thread-count invariant
  bool peak_candidates = true;        // global solvers refine grid peaks of N's blocks
  int candidates_per_block = 2;
};

namespace detail {

enum class BudgetMode { bottom_up, top_down };

// Blocks with a zero error level are collapsed out of the structure; the
// remaining rows/columns of N(iw) form the effective problem.
struct BudgetLayout {
  std::vector<std::size_t> active;       // active subsystem block indices
  std::vector<Index> rows, cols;         // selected N rows/cols
  std::vector<std::pair<Index, Index>> row_runs, col_runs;  // per active block
  std::pair<Index, Index> perf_rows, perf_cols;             // e_c rows, u_c cols
  BlockStructure active_structure;       // for certificates / cross checks
};

inline BudgetLayout make_layout(const InterconnectionMatrix& K,
                                const std::vector<bool>& active_flags) {
  BudgetLayout L;
  const std::size_t k = K.subsystem_count();
  std::vector<Index> m_off(k + 1, 0), p_off(k + 1, 0);
  for (std::size_t j = 0; j < k; ++j) {
    m_off[j + 1] = m_off[j] + K.input_dims[j];
    p_off[j + 1] = p_off[j] + K.output_dims[j];
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (!active_flags[j]) continue;
    L.active.push_back(j);
    L.row_runs.push_back({static_cast<Index>(L.rows.size()), K.input_dims[j]});
    for (Index i = 0; i < K.input_dims[j]; ++i) L.rows.push_back(m_off[j] + i);
    L.col_runs.push_back({static_cast<Index>(L.cols.size()), K.output_dims[j]});
    for (Index i = 0; i < K.output_dims[j]; ++i) L.cols.push_back(p_off[j] + i);
    L.active_structure.subsystem_blocks.push_back({K.output_dims[j], K.input_dims[j]});
  }
  L.perf_rows = {static_cast<Index>(L.rows.size()), K.pc()};
  for (Index i = 0; i < K.pc(); ++i) L.rows.push_back(K.mb() + i);
  L.perf_cols = {static_cast<Index>(L.cols.size()), K.mc()};
  for (Index i = 0; i < K.mc(); ++i) L.cols.push_back(K.pb() + i);
  L.active_structure.performance_block = UncertainBlock{K.mc(), K.pc()};
  return L;
}

inline ComplexMatrix select(const ComplexMatrix& N, const std::vector<Index>& rows,
                            const std::vector<Index>& cols) {
  ComplexMatrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = N(rows[r], cols[c]);
  return out;
}

struct PointWarm {
  std::vector<Vector> d;
  std::optional<double> gamma;
};

// One frequency point of either solver family. eps_active holds the error
// levels of the active blocks (ordering of layout.active); for top-down the
// entry of block q is ignored and eps_c must be positive.
inline FrequencyPoint solve_point(const ComplexMatrix& Nw, double omega,
                                  const BudgetLayout& L, const Vector& eps_active,
                                  double eps_c, BudgetMode mode, std::size_t q_pos,
                                  const GammaLmiOptions& opts, PointWarm& warm,
                                  std::size_t k_total,
                                  const std::vector<std::size_t>& active_to_full,
                                  Index q_full) {
  FrequencyPoint pt;
  pt.omega = omega;
  const ComplexMatrix Ns = select(Nw, L.rows, L.cols);
  const Index nrows = Ns.rows();

  auto row_identity = [&](std::pair<Index, Index> run) {
    ComplexMatrix E = ComplexMatrix::Zero(nrows, nrows);
    E.block(run.first, run.first, run.second, run.second).setIdentity();
    return E;
  };
  auto gram = [&](std::pair<Index, Index> run) {
    const ComplexMatrix cols = Ns.middleCols(run.first, run.second);
    return ComplexMatrix(cols * cols.adjoint());
  };

  GammaLmiProblem prob;
  prob.base.F0 = ComplexMatrix::Zero(nrows, nrows);
  if (mode == BudgetMode::bottom_up) {
    prob.base.F0 = row_identity(L.perf_rows);
    for (std::size_t t = 0; t < L.active.size(); ++t)
      prob.base.terms.push_back(row_identity(L.row_runs[t]) -
                                eps_active(static_cast<Index>(t)) *
                                    eps_active(static_cast<Index>(t)) * gram(L.col_runs[t]));
    prob.gamma_term = -gram(L.perf_cols);
  } else {
    prob.base.F0 = row_identity(L.row_runs[q_pos]);
    for (std::size_t t = 0; t < L.active.size(); ++t) {
      if (t == q_pos) continue;
      prob.base.terms.push_back(row_identity(L.row_runs[t]) -
                                eps_active(static_cast<Index>(t)) *
                                    eps_active(static_cast<Index>(t)) * gram(L.col_runs[t]));
    }
    prob.base.terms.push_back(eps_c * eps_c * row_identity(L.perf_rows) -
                              gram(L.perf_cols));
    prob.gamma_term = -gram(L.col_runs[q_pos]);
  }

  const auto res = lmi_max_gamma(prob, GammaSense::maximize, opts, warm.d, warm.gamma);
  if (!res) {
    pt.feasible = false;
    warm.d.clear();
    warm.gamma.reset();
    return pt;
  }
  pt.feasible = true;
  pt.bracket_edge = res->hit_bracket_edge;
  pt.certificate_margin = res->lambda_min;
  warm.d.assign(1, res->d);
  warm.gamma = res->gamma;

  ScalingPair cert;
  cert.d = Vector::Ones(static_cast<Index>(k_total));
  cert.d_c = 1.0;
  if (mode == BudgetMode::bottom_up) {
    pt.value = 1.0 / std::sqrt(res->gamma);
    // solver variables are gamma * d_j; undo the substitution
    for (std::size_t t = 0; t < L.active.size(); ++t)
      cert.d(static_cast<Index>(active_to_full[t])) =
          res->d(static_cast<Index>(t)) / res->gamma;
    cert.normalized_index = static_cast<Index>(k_total);  // d_c = 1
  } else {
    pt.value = std::sqrt(res->gamma);
    Index slot = 0;
    for (std::size_t t = 0; t < L.active.size(); ++t) {
      if (t == q_pos) continue;
      cert.d(static_cast<Index>(active_to_full[t])) = res->d(slot++);
    }
    cert.d_c = res->d(slot);
    cert.normalized_index = q_full;  // d_q = 1
  }
  pt.certificate = cert;
  return pt;
}

inline void require_assumption_one(const CoupledSystem& cs, const std::string& who) {
  const WellPosedness wp = check_wellposed(cs);
  if (!wp.ok)
    throw IllPosedError(who + ": interconnection is ill-posed", wp.condition_number);
  if (!check_internal_stability(cs))
    throw UnstableSystemError(who + ": interconnected system is not internally stable", 0.0);
}

// sigma_max of the three nonzero blocks of N(iw), used for peak hunting.
inline std::array<double, 3> block_sigmas(const NominalEvaluator& N, const ComplexMatrix& Nw) {
  const Index mb = N.K().mb(), pb = N.K().pb(), mc = N.K().mc(), pc = N.K().pc();
  return {sigma_max(Nw.topLeftCorner(mb, pb)), sigma_max(Nw.topRightCorner(mb, mc)),
          sigma_max(Nw.bottomLeftCorner(pc, pb))};
}

inline std::vector<double> peak_candidate_frequencies(const NominalEvaluator& N,
                                                      const FrequencyGrid& grid,
                                                      const std::vector<ComplexMatrix>& cache,
                                                      int per_block) {
  const std::size_t npts = grid.size();
  std::vector<std::array<double, 3>> sig(npts);
  for (std::size_t i = 0; i < npts; ++i) sig[i] = block_sigmas(N, cache[i]);

  std::vector<double> out;
  for (int b = 0; b < 3; ++b) {
    std::vector<std::size_t> local;
    for (std::size_t i = 0; i < npts; ++i) {
      const bool up = (i == 0) || sig[i][b] >= sig[i - 1][b];
      const bool down = (i + 1 == npts) || sig[i][b] >= sig[i + 1][b];
      if (up && down && sig[i][b] > 0.0) local.push_back(i);
    }
    std::sort(local.begin(), local.end(),
              [&](std::size_t x, std::size_t y) { return sig[x][b] > sig[y][b]; });
    if (local.size() > static_cast<std::size_t>(per_block))
      local.resize(static_cast<std::size_t>(per_block));
    for (std::size_t ci : local) {
      const double wl = (ci == 0) ? grid[0] : grid[ci - 1];
      const double wr = (ci + 1 == npts) ? grid[npts - 1] : grid[ci + 1];
      if (wl >= wr) continue;
      double arg = grid[ci];
      modred::detail::golden_max(
          [&](double logw) {
            return block_sigmas(N, N(std::pow(10.0, logw)))[static_cast<std::size_t>(b)];
          },
          std::log10(wl), std::log10(wr), 1e-5, 48, &arg);
      out.push_back(std::pow(10.0, arg));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct SweepRequest {
  BudgetMode mode = BudgetMode::bottom_up;
  Index q = -1;                                  // top-down target
  std::function<Vector(std::size_t)> eps_at;     // k levels at grid index
  std::function<double(std::size_t)> eps_c_at;   // performance level at grid index
  Vector eps_const;                              // used for off-grid candidate points
  double eps_c_const = 0.0;
  bool global = false;
};

inline BoundResult run_sweep(const CoupledSystem& cs, const FrequencyGrid& grid,
                             const SweepRequest& req, const BudgetOptions& opts) {
  validate(grid);
  require_assumption_one(cs, req.mode == BudgetMode::bottom_up ? "bottom_up" : "top_down");
  const auto t0 = std::chrono::steady_clock::now();

  const NominalEvaluator N(cs);
  const std::size_t k = cs.subsystems().size();
  const std::size_t npts = grid.size();

  std::vector<ComplexMatrix> cache(npts);
  parallel_for_chunks(npts, opts.chunks, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) cache[i] = N(grid[i]);
  });

  // Off-grid peak candidates participate only in global solves (their error
  // levels are the global constants).
  std::vector<double> extra;
  if (req.global && opts.peak_candidates)
    extra = peak_candidate_frequencies(N, grid, cache, opts.candidates_per_block);

  BoundResult result;
  result.per_frequency.resize(npts + extra.size());

  auto layout_for = [&](const Vector& eps) {
    std::vector<bool> active(k, false);
    for (std::size_t j = 0; j < k; ++j)
      active[j] = (req.mode == BudgetMode::top_down && static_cast<Index>(j) == req.q) ||
                  eps(static_cast<Index>(j)) > 0.0;
    return make_layout(cs.K(), active);
  };

  parallel_for_chunks(npts, opts.chunks, [&](std::size_t b, std::size_t e) {
    PointWarm warm;
    for (std::size_t i = b; i < e; ++i) {
      const Vector eps = req.eps_at(i);
      const BudgetLayout L = layout_for(eps);
      Vector eps_active(static_cast<Index>(L.active.size()));
      std::size_t q_pos = 0;
      for (std::size_t t = 0; t < L.active.size(); ++t) {
        eps_active(static_cast<Index>(t)) = eps(static_cast<Index>(L.active[t]));
        if (static_cast<Index>(L.active[t]) == req.q) q_pos = t;
      }
      const double eps_c = req.eps_c_at ? req.eps_c_at(i) : 0.0;
      if (req.mode == BudgetMode::top_down && !(eps_c > 0.0))
        throw InvalidArgument("top_down: performance level must be positive");
      result.per_frequency[i] =
          solve_point(cache[i], grid[i], L, eps_active, eps_c, req.mode, q_pos, opts.lmi,
                      warm, k, L.active, req.q);
    }
  });

  // Candidate points run sequentially after the grid (cheap; few points).
  {
    PointWarm warm;
    for (std::size_t t = 0; t < extra.size(); ++t) {
      const Vector eps = req.eps_const;
      const BudgetLayout L = layout_for(eps);
      Vector eps_active(static_cast<Index>(L.active.size()));
      std::size_t q_pos = 0;
      for (std::size_t u = 0; u < L.active.size(); ++u) {
        eps_active(static_cast<Index>(u)) = eps(static_cast<Index>(L.active[u]));
        if (static_cast<Index>(L.active[u]) == req.q) q_pos = u;
      }
      result.per_frequency[npts + t] =
          solve_point(N(extra[t]), extra[t], L, eps_active, req.eps_c_const, req.mode,
                      q_pos, opts.lmi, warm, k, L.active, req.q);
    }
  }

  std::stable_sort(result.per_frequency.begin(), result.per_frequency.end(),
                   [](const FrequencyPoint& a, const FrequencyPoint& b) {
                     return a.omega < b.omega;
                   });

  bool all_feasible = true;
  for (const auto& pt : result.per_frequency) {
    if (!pt.feasible) {
      all_feasible = false;
      ++result.stats.infeasible_points;
    }
  }
  result.stats.points = result.per_frequency.size();
  if (req.global && all_feasible) {
    double best = 0.0, best_w = 0.0;
    bool first = true;
    for (const auto& pt : result.per_frequency) {
      const bool better = req.mode == BudgetMode::bottom_up ? (first || *pt.value > best)
                                                            : (first || *pt.value < best);
      if (better) {
        best = *pt.value;
        best_w = pt.omega;
        first = false;
      }
    }
    result.global_value = best;
    result.global_omega = best_w;
    result.wellposed_stable_certified = true;
  }
  result.stats.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace detail

/// Smallest certified global bound eps_c with ||E_c||inf <= eps_c for any
/// subsystem errors ||E_j||inf <= eps_j. Infeasible grid points leave the
/// global value absent. A certificate also guarantees well-posedness and
/// internal stability of the reduced interconnection.
inline BoundResult bottom_up_global(const CoupledSystem& cs, const Vector& eps_j,
                                    const FrequencyGrid& grid,
                                    const BudgetOptions& opts = {}) {
  if (eps_j.size() != static_cast<Index>(cs.subsystems().size()))
    throw DimensionError("bottom_up_global: need one level per subsystem");
  if ((eps_j.array() < 0.0).any())
    throw InvalidArgument("bottom_up_global: levels must be nonnegative");
  detail::SweepRequest req;
  req.mode = detail::BudgetMode::bottom_up;
  req.eps_at = [eps_j](std::size_t) { return eps_j; };
  req.eps_const = eps_j;
  req.global = true;
  return detail::run_sweep(cs, grid, req, opts);
}

/// Per-frequency bound eps_c(w); infeasible frequencies are reported, not
/// fatal, and no stability claim is attached.
inline BoundResult bottom_up_freq(const CoupledSystem& cs,
                                  const std::vector<Vector>& eps_profiles,
                                  const FrequencyGrid& grid,
                                  const BudgetOptions& opts = {}) {
  const std::size_t k = cs.subsystems().size();
  if (eps_profiles.size() != k)
    throw DimensionError("bottom_up_freq: need one profile per subsystem");
  for (const auto& v : eps_profiles) {
    if (v.size() != 1 && v.size() != static_cast<Index>(grid.size()))
      throw DimensionError("bottom_up_freq: profile length must match grid");
    if ((v.array() < 0.0).any())
      throw InvalidArgument("bottom_up_freq: levels must be nonnegative");
  }
  detail::SweepRequest req;
  req.mode = detail::BudgetMode::bottom_up;
  req.eps_at = [&eps_profiles, k](std::size_t i) {
    Vector eps(static_cast<Index>(k));
    for (std::size_t j = 0; j < k; ++j) {
      const Vector& v = eps_profiles[j];
      eps(static_cast<Index>(j)) = v.size() == 1 ? v(0) : v(static_cast<Index>(i));
    }
    return eps;
  };
  return detail::run_sweep(cs, grid, req, opts);
}

/// Largest global budget eps_q for subsystem q such that any reduction of it
/// within that budget keeps ||E_c||inf below eps_c (errors of the other
/// subsystems fixed at eps_other).
inline BoundResult top_down_global(const CoupledSystem& cs, double eps_c,
                                   const Vector& eps_other, Index q,
                                   const FrequencyGrid& grid,
                                   const BudgetOptions& opts = {}) {
  const Index k = static_cast<Index>(cs.subsystems().size());
  if (q < 0 || q >= k) throw InvalidArgument("top_down_global: bad subsystem index");
  if (!(eps_c > 0.0)) throw InvalidArgument("top_down_global: eps_c must be positive");
  if (eps_other.size() != k)
    throw DimensionError("top_down_global: need one level per subsystem");
  detail::SweepRequest req;
  req.mode = detail::BudgetMode::top_down;
  req.q = q;
  req.eps_at = [eps_other](std::size_t) { return eps_other; };
  req.eps_c_at = [eps_c](std::size_t) { return eps_c; };
  req.eps_const = eps_other;
  req.eps_c_const = eps_c;
  req.global = true;
  return detail::run_sweep(cs, grid, req, opts);
}

/// Frequency-dependent budget eps_q(w); this profile is what the
/// frequency-weighted reduction of subsystem q consumes downstream.
inline BoundResult top_down_freq(const CoupledSystem& cs, const Vector& eps_c_profile,
                                 const std::vector<Vector>& eps_other_profiles, Index q,
                                 const FrequencyGrid& grid,
                                 const BudgetOptions& opts = {}) {
  const std::size_t k = cs.subsystems().size();
  if (q < 0 || q >= static_cast<Index>(k))
    throw InvalidArgument("top_down_freq: bad subsystem index");
  if (eps_other_profiles.size() != k)
    throw DimensionError("top_down_freq: need one profile per subsystem");
  if (eps_c_profile.size() != 1 && eps_c_profile.size() != static_cast<Index>(grid.size()))
    throw DimensionError("top_down_freq: performance profile length must match grid");
  detail::SweepRequest req;
  req.mode = detail::BudgetMode::top_down;
  req.q = q;
  req.eps_at = [&eps_other_profiles, k](std::size_t i) {
    Vector eps(static_cast<Index>(k));
    for (std::size_t j = 0; j < k; ++j) {
      const Vector& v = eps_other_profiles[j];
      eps(static_cast<Index>(j)) = v.size() == 1 ? v(0) : v(static_cast<Index>(i));
    }
    return eps;
  };
  req.eps_c_at = [&eps_c_profile](std::size_t i) {
    return eps_c_profile.size() == 1 ? eps_c_profile(0)
                                     : eps_c_profile(static_cast<Index>(i));
  };
  return detail::run_sweep(cs, grid, req, opts);
}

/// Reference path for cross-validation: bisect directly on the performance
/// level, deciding each level with the mu upper bound of the weighted
/// nominal matrix. Agrees with the LMI path on feasibility and (within
/// tolerance) on values.
inline BoundResult bisect_cross_check(const CoupledSystem& cs, const WeightProfile& profile,
                                      const FrequencyGrid& grid,
                                      const BudgetOptions& opts = {}) {
  validate(grid);
  validate(profile, cs.subsystems().size(), grid.size());
  detail::require_assumption_one(cs, "bisect_cross_check");
  const auto t0 = std::chrono::steady_clock::now();

  const NominalEvaluator N(cs);
  const std::size_t k = cs.subsystems().size();
  const std::size_t npts = grid.size();

  BoundResult result;
  result.per_frequency.resize(npts);

  parallel_for_chunks(npts, opts.chunks, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      Vector eps(static_cast<Index>(k));
      for (std::size_t j = 0; j < k; ++j) eps(static_cast<Index>(j)) = profile.eps_subsystem(j, i);
      std::vector<bool> active(k, false);
      for (std::size_t j = 0; j < k; ++j) active[j] = eps(static_cast<Index>(j)) > 0.0;
      const detail::BudgetLayout L = detail::make_layout(cs.K(), active);
      const ComplexMatrix Ns = detail::select(N(grid[i]), L.rows, L.cols);

      FrequencyPoint pt;
      pt.omega = grid[i];

      // Weighted nominal matrix: subsystem columns scaled by eps_j, the e_c
      // rows by 1/eps_c.
      auto weighted = [&](double eps_c) {
        ComplexMatrix M = Ns;
        for (std::size_t t = 0; t < L.active.size(); ++t)
          M.middleCols(L.col_runs[t].first, L.col_runs[t].second) *=
              eps(static_cast<Index>(L.active[t]));
        M.middleRows(L.perf_rows.first, L.perf_rows.second) /= eps_c;
        return M;
      };
      auto level_ok = [&](double eps_c) {
        return mu_upper_bound(weighted(eps_c), L.active_structure, 1e-6, opts.lmi.inner)
                   .value < 1.0;
      };

      double lo = 1e-12, hi = 1e12;
      if (!level_ok(hi)) {
        pt.feasible = false;
        result.per_frequency[i] = pt;
        continue;
      }
      if (level_ok(lo)) {
        pt.feasible = true;
        pt.value = lo;
        pt.bracket_edge = true;
        result.per_frequency[i] = pt;
        continue;
      }
      while (hi - lo > 1e-4 * hi) {
        const double mid = std::sqrt(hi * lo);
        (level_ok(mid) ? hi : lo) = mid;
      }
      pt.feasible = true;
      pt.value = hi;
      result.per_frequency[i] = pt;
    }
  });

  bool all_feasible = true;
  for (const auto& pt : result.per_frequency) {
    if (!pt.feasible) {
      all_feasible = false;
      ++result.stats.infeasible_points;
    }
  }
  result.stats.points = npts;
  if (all_feasible) {
    double best = 0.0, best_w = grid[0];
    for (const auto& pt : result.per_frequency)
      if (*pt.value > best) {
        best = *pt.value;
        best_w = pt.omega;
      }
    result.global_value = best;
    result.global_omega = best_w;
  }
  result.stats.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

/// Corollary check: a certified global bound implies the reduced
/// interconnection is internally stable. A false return under a valid
/// certificate is a defect, never an acceptable outcome.
inline bool certify_stability(const CoupledSystem& cs, const CoupledSystem& cs_hat,
                              const BoundResult& bound) {
  (void)cs;
  if (!bound.global_value)
    throw InvalidArgument("certify_stability: bound carries no global certificate");
  return check_internal_stability(cs_hat);
}

}  // namespace modred
