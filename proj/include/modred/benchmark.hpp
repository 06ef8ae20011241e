#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "modred/beam.hpp"
#include "modred/interconnect.hpp"

namespace modred {

/// Three-beam validation case: two cantilevers coupled to a free-free beam
/// through translational (4e4 N/m) and rotational (4e2 Nm/rad) springs, a
/// transversal force input at the middle of beam 2 and a transversal
/// displacement output at the middle of beam 3.
struct ThreeBeamConfig {
  double spring_translational = 4e4;
  double spring_rotational = 4e2;
  Index elements_1 = 100;
  Index elements_2 = 40;
  Index elements_3 = 60;

  static ThreeBeamConfig mini() {
    ThreeBeamConfig c;
    c.elements_1 = 10;
    c.elements_2 = 4;
    c.elements_3 = 6;
    return c;
  }
};

namespace detail {

inline BeamSpec three_beam_common() {
  BeamSpec s;
  s.cross_section_area = 1e-5;
  s.second_area_moment = 1e-9;
  s.youngs_modulus = 2e11;
  s.density = 8e3;
  s.modal_damping_ratio = 0.06;
  return s;
}

}  // namespace detail

inline CoupledSystem build_three_beam_benchmark(const ThreeBeamConfig& cfg = {}) {
  if (cfg.elements_2 % 2 != 0 || cfg.elements_3 % 2 != 0)
    throw InvalidArgument("three-beam benchmark: beams 2 and 3 need a middle node");

  // Beam 1: cantilever, clamped left, coupled at its free tip (last node).
  BeamSpec b1 = detail::three_beam_common();
  b1.length = 1.0;
  b1.n_elements = cfg.elements_1;
  b1.boundary = BeamBoundary::cantilever_left;
  const Index tip1 = b1.n_elements;
  b1.input_dofs = {{tip1, DofKind::translation}, {tip1, DofKind::rotation}};
  b1.output_dofs = b1.input_dofs;

  // Beam 2: free-free; spring forces at both ends, external force at the
  // middle node; displacement/rotation outputs at both ends.
  BeamSpec b2 = detail::three_beam_common();
  b2.length = 0.4;
  b2.n_elements = cfg.elements_2;
  b2.boundary = BeamBoundary::free_free;
  const Index mid2 = cfg.elements_2 / 2;
  const Index right2 = cfg.elements_2;
  b2.input_dofs = {{0, DofKind::translation},
                   {0, DofKind::rotation},
                   {mid2, DofKind::translation},
                   {right2, DofKind::translation},
                   {right2, DofKind::rotation}};
  b2.output_dofs = {{0, DofKind::translation},
                    {0, DofKind::rotation},
                    {right2, DofKind::translation},
                    {right2, DofKind::rotation}};

  // Beam 3: cantilever built clamped-left and used mirrored (its free tip
  // faces beam 2); a uniform beam is symmetric, so transfer functions are
  // unaffected. Output 3 reads the middle displacement (the external y_c).
  BeamSpec b3 = detail::three_beam_common();
  b3.length = 0.6;
  b3.n_elements = cfg.elements_3;
  b3.boundary = BeamBoundary::cantilever_left;
  const Index tip3 = b3.n_elements;
  const Index mid3 = cfg.elements_3 / 2;
  b3.input_dofs = {{tip3, DofKind::translation}, {tip3, DofKind::rotation}};
  b3.output_dofs = {{tip3, DofKind::translation},
                    {tip3, DofKind::rotation},
                    {mid3, DofKind::translation}};

  std::vector<StateSpaceModel> models{beam_state_space(b1), beam_state_space(b2),
                                      beam_state_space(b3)};

  // Rows: u1 (tip F, tip M), u2 (left F, left M, mid F, right F, right M),
  //       u3 (tip F, tip M), then y_c.
  // Cols: y1 (tip w, tip th), y2 (left w, left th, right w, right th),
  //       y3 (tip w, tip th, mid w), then u_c.
  const double kt = cfg.spring_translational;
  const double kr = cfg.spring_rotational;
  Matrix K = Matrix::Zero(10, 10);
  K(0, 0) = -kt; K(0, 2) = kt;
  K(1, 1) = -kr; K(1, 3) = kr;
  K(2, 0) = kt;  K(2, 2) = -kt;
  K(3, 1) = kr;  K(3, 3) = -kr;
  K(4, 9) = 1.0;                 // u_c drives the middle of beam 2
  K(5, 4) = -kt; K(5, 6) = kt;
  K(6, 5) = -kr; K(6, 7) = kr;
  K(7, 4) = kt;  K(7, 6) = -kt;
  K(8, 5) = kr;  K(8, 7) = -kr;
  K(9, 8) = 1.0;                 // y_c reads the middle of beam 3

  InterconnectionMatrix ic =
      InterconnectionMatrix::from_full(K, {2, 5, 2}, {2, 4, 3});
  return CoupledSystem(std::move(models), std::move(ic));
}

/// Performance profile eps_c(w) = max(beta1 * sigma(G_c(iw)), beta2).
inline Vector epsilon_c_profile(const Vector& gc_sigma, double beta1, double beta2) {
  if (!(beta1 > 0.0) || !(beta2 > 0.0))
    throw InvalidArgument("epsilon_c_profile: beta1, beta2 must be positive");
  return (beta1 * gc_sigma.array()).max(beta2).matrix();
}

/// Deterministic random coupled system for property tests: k small stable
/// subsystems, K11 scaled by coupling_scale and shrunk (halved) until the
/// closed loop is well-posed and internally stable.
inline CoupledSystem random_coupled_system(std::uint64_t seed, std::size_t k,
                                           Index max_states = 6, double coupling_scale = 0.5,
                                           Index mc = 1, Index pc = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<Index> nstates(1, max_states);
  std::uniform_int_distribution<Index> iodim(1, 3);
  auto randn = [&](Index r, Index c) {
    Matrix M(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) M(i, j) = gauss(rng);
    return M;
  };

  std::vector<StateSpaceModel> models;
  std::vector<Index> mdims, pdims;
  for (std::size_t j = 0; j < k; ++j) {
    const Index n = nstates(rng), m = iodim(rng), p = iodim(rng);
    StateSpaceModel sys;
    sys.A = randn(n, n);
    const double shift = stability_report(sys.A).max_real_part;
    sys.A.diagonal().array() -= shift + 0.3 + 0.7 * std::abs(gauss(rng));
    sys.B = randn(n, m);
    sys.C = randn(p, n);
    sys.D = Matrix::Zero(p, m);
    models.push_back(std::move(sys));
    mdims.push_back(m);
    pdims.push_back(p);
  }
  Index mb = 0, pb = 0;
  for (std::size_t j = 0; j < k; ++j) {
    mb += mdims[j];
    pb += pdims[j];
  }

  const Matrix K11_raw = randn(mb, pb);
  InterconnectionMatrix ic;
  ic.K12 = randn(mb, mc);
  ic.K21 = randn(pc, pb);
  ic.K22 = Matrix::Zero(pc, mc);
  ic.input_dims = mdims;
  ic.output_dims = pdims;

  double scale = coupling_scale;
  for (int attempt = 0; attempt < 64; ++attempt) {
    ic.K11 = scale * K11_raw;
    CoupledSystem cs(models, ic);
    if (check_wellposed(cs).ok && check_internal_stability(cs)) return cs;
    scale *= 0.5;
  }
  ic.K11 = Matrix::Zero(mb, pb);  // decoupled fallback is always admissible
  return CoupledSystem(std::move(models), std::move(ic));
}

}  // namespace modred
