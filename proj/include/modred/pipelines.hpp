#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "modred/benchmark.hpp"
#include "modred/budget.hpp"
#include "modred/hinf.hpp"
#include "modred/interconnect.hpp"
#include "modred/reduction.hpp"
#include "modred/weight_fit.hpp"

namespace modred {

inline CoupledSystem replace_subsystem(const CoupledSystem& cs, std::size_t j,
                                       StateSpaceModel model) {
  if (j >= cs.subsystems().size())
    throw InvalidArgument("replace_subsystem: index out of range");
  std::vector<StateSpaceModel> subs = cs.subsystems();
  subs[j] = std::move(model);
  return CoupledSystem(std::move(subs), cs.K());
}

/// One row of the bottom-up comparison: reduce one subsystem to a given
/// order, then compare the a posteriori coupled error against the two
/// certified bounds (from the actual subsystem error and from its tail-sum
/// budget).
struct BottomUpRow {
  Index order = 0;
  double error_c = 0.0;                       // ||E_c||inf after reduction
  double eps1_actual = 0.0;                   // ||E_q||inf
  double eps1_tail = 0.0;                     // tail-sum budget
  std::optional<double> eps_c_from_actual;    // bound fed with eps1_actual
  std::optional<double> eps_c_from_tail;      // bound fed with eps1_tail
  bool reduced_interconnection_stable = false;
};

/// Sweeps reduction orders of one subsystem through the bottom-up global
/// solver; the balancing basis is computed once.
class BottomUpStudy {
 public:
  BottomUpStudy(CoupledSystem cs, Index q, FrequencyGrid grid,
                BoundConvention convention = BoundConvention::plain_tail_sum,
                BudgetOptions opts = {})
      : cs_(std::move(cs)),
        q_(q),
        grid_(std::move(grid)),
        convention_(convention),
        opts_(opts),
        reducer_(std::make_unique<BalancedReducer>(cs_.subsystems().at(q))) {}

  const BalancedReducer& reducer() const { return *reducer_; }
  const FrequencyGrid& grid() const { return grid_; }

  BottomUpRow run_order(Index r) const {
    BottomUpRow row;
    row.order = r;
    const StateSpaceModel& full = cs_.subsystems()[static_cast<std::size_t>(q_)];
    const ReductionResult red = reducer_->truncate(r);
    row.eps1_tail = a_priori_bound(red.hankel, r, convention_);
    row.eps1_actual = hinf_norm(parallel_diff(full, red.reduced), grid_).value;

    const CoupledSystem cs_hat = replace_subsystem(cs_, static_cast<std::size_t>(q_),
                                                   red.reduced);
    row.error_c = hinf_norm(error_system_ec(cs_, cs_hat), grid_).value;
    row.reduced_interconnection_stable = check_internal_stability(cs_hat);

    Vector eps = Vector::Zero(static_cast<Index>(cs_.subsystems().size()));
    eps(q_) = row.eps1_actual;
    row.eps_c_from_actual = bottom_up_global(cs_, eps, grid_, opts_).global_value;
    eps(q_) = row.eps1_tail;
    row.eps_c_from_tail = bottom_up_global(cs_, eps, grid_, opts_).global_value;
    return row;
  }

  const CoupledSystem& coupled() const { return cs_; }

 private:
  CoupledSystem cs_;
  Index q_;
  FrequencyGrid grid_;
  BoundConvention convention_;
  BudgetOptions opts_;
  std::unique_ptr<BalancedReducer> reducer_;
};

/// Full top-down run: user accuracy profile on the interconnection ->
/// frequency-dependent subsystem budget -> weighted reduction -> a
/// posteriori validation, with every intermediate curve kept for export.
struct TopDownPipelineResult {
  Vector gc_sigma;         // sigma(G_c(iw)) on the grid
  Vector eps_c;            // user profile max(beta1*sigma, beta2)
  Vector eps_q;            // allowed subsystem error (NaN where infeasible)
  WeightFitResult weight;  // rational fit of 1/eps_q
  ReductionResult reduction;
  Vector sigma_eq;         // sigma(E_q(iw)) after reduction
  Vector eps_c_validation; // bottom-up bound from the actual subsystem error
  Vector sigma_ec;         // sigma(E_c(iw)) after reduction
  bool subsystem_spec_met = false;  // sigma_eq <= eps_q on the whole grid
  bool system_spec_met = false;     // sigma_ec <= eps_c on the whole grid
  bool validation_within_spec = false;  // eps_c_validation <= eps_c
};

inline TopDownPipelineResult run_top_down_pipeline(const CoupledSystem& cs, Index q,
                                                   double beta1, double beta2,
                                                   const FrequencyGrid& grid, Index r,
                                                   Index weight_order = 8,
                                                   const BudgetOptions& opts = {}) {
  validate(grid);
  const std::size_t k = cs.subsystems().size();
  const std::size_t npts = grid.size();
  TopDownPipelineResult out;

  const StateSpaceModel gc = upper_lft_gc(cs);
  const FrequencyResponseEvaluator gc_eval(gc);
  out.gc_sigma.resize(static_cast<Index>(npts));
  for (std::size_t i = 0; i < npts; ++i)
    out.gc_sigma(static_cast<Index>(i)) = sigma_max(gc_eval(grid[i]));
  out.eps_c = epsilon_c_profile(out.gc_sigma, beta1, beta2);

  std::vector<Vector> zeros(k, Vector::Zero(1));
  const BoundResult td = top_down_freq(cs, out.eps_c, zeros, q, grid, opts);
  out.eps_q = Vector::Constant(static_cast<Index>(npts),
                               std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < npts; ++i)
    if (td.per_frequency[i].feasible) out.eps_q(static_cast<Index>(i)) = *td.per_frequency[i].value;
  if (!out.eps_q.allFinite())
    throw NumericalError("top-down pipeline: subsystem budget infeasible at some frequency");

  out.weight = fit_rational_weight(out.eps_q, grid, weight_order);
  const StateSpaceModel& full = cs.subsystems()[static_cast<std::size_t>(q)];
  out.reduction = fw_balanced_truncate(full, out.weight.weight, r);

  const FrequencyResponseEvaluator eq_eval(parallel_diff(full, out.reduction.reduced));
  out.sigma_eq.resize(static_cast<Index>(npts));
  for (std::size_t i = 0; i < npts; ++i)
    out.sigma_eq(static_cast<Index>(i)) = sigma_max(eq_eval(grid[i]));
  out.subsystem_spec_met = (out.sigma_eq.array() <= out.eps_q.array()).all();

  std::vector<Vector> profiles(k, Vector::Zero(1));
  profiles[static_cast<std::size_t>(q)] = out.sigma_eq;
  const BoundResult validation = bottom_up_freq(cs, profiles, grid, opts);
  out.eps_c_validation = Vector::Constant(static_cast<Index>(npts),
                                          std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < npts; ++i)
    if (validation.per_frequency[i].feasible)
      out.eps_c_validation(static_cast<Index>(i)) = *validation.per_frequency[i].value;
  out.validation_within_spec =
      out.eps_c_validation.allFinite() &&
      (out.eps_c_validation.array() <= out.eps_c.array() * (1 + 1e-9)).all();

  const CoupledSystem cs_hat =
      replace_subsystem(cs, static_cast<std::size_t>(q), out.reduction.reduced);
  const FrequencyResponseEvaluator ec_eval(error_system_ec(cs, cs_hat));
  out.sigma_ec.resize(static_cast<Index>(npts));
  for (std::size_t i = 0; i < npts; ++i)
    out.sigma_ec(static_cast<Index>(i)) = sigma_max(ec_eval(grid[i]));
  out.system_spec_met = (out.sigma_ec.array() <= out.eps_c.array()).all();
  return out;
}

}  // namespace modred
