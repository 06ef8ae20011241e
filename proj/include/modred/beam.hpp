#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "modred/state_space.hpp"

namespace modred {

enum class DofKind { translation, rotation };
enum class BeamBoundary { cantilever_left, free_free };

struct BeamDof {
  Index node = 0;  // 0-based, left to right
  DofKind kind = DofKind::translation;
};

/// Planar bending beam discretized with two-node Euler elements (cubic
/// Hermite shape functions, consistent mass), two dofs per node
/// (transversal displacement, rotation).
struct BeamSpec {
  double cross_section_area = 0.0;  // m^2
  double second_area_moment = 0.0;  // m^4
  double youngs_modulus = 0.0;      // Pa
  double density = 0.0;             // kg/m^3
  double modal_damping_ratio = 0.0;
  double length = 0.0;              // m
  Index n_elements = 0;
  BeamBoundary boundary = BeamBoundary::cantilever_left;
  std::vector<BeamDof> input_dofs;
  std::vector<BeamDof> output_dofs;
};

inline void validate(const BeamSpec& spec) {
  if (!(spec.cross_section_area > 0) || !(spec.second_area_moment > 0) ||
      !(spec.youngs_modulus > 0) || !(spec.density > 0) || !(spec.length > 0))
    throw InvalidArgument("BeamSpec: physical parameters must be positive");
  if (!(spec.modal_damping_ratio > 0) || !(spec.modal_damping_ratio < 1))
    throw InvalidArgument("BeamSpec: damping ratio must lie in (0,1)");
  if (spec.n_elements < 1) throw InvalidArgument("BeamSpec: need at least one element");
  for (const auto& list : {spec.input_dofs, spec.output_dofs})
    for (const auto& dof : list) {
      if (dof.node < 0 || dof.node > spec.n_elements)
        throw InvalidArgument("BeamSpec: dof node out of range");
      if (spec.boundary == BeamBoundary::cantilever_left && dof.node == 0)
        throw InvalidArgument("BeamSpec: dof on the clamped node");
    }
}

struct BeamMatrices {
  Matrix mass;       // free dofs
  Matrix stiffness;  // free dofs
  // free-dof index of a node dof, or -1 when eliminated by the boundary
  Index free_index(const BeamSpec& spec, const BeamDof& dof) const {
    const Index raw = 2 * dof.node + (dof.kind == DofKind::rotation ? 1 : 0);
    if (spec.boundary == BeamBoundary::cantilever_left) {
      if (dof.node == 0) return -1;
      return raw - 2;
    }
    return raw;
  }
};

/// Assembled global mass/stiffness over the free dofs. The cantilever
/// clamp eliminates both dofs of the clamped (left) node; free-free keeps
/// everything including the two rigid-body modes.
inline BeamMatrices beam_fe_matrices(const BeamSpec& spec) {
  validate(spec);
  const Index ne = spec.n_elements;
  const Index ndof = 2 * (ne + 1);
  const double h = spec.length / double(ne);
  const double EI = spec.youngs_modulus * spec.second_area_moment;
  const double rhoAh = spec.density * spec.cross_section_area * h;

  Eigen::Matrix4d ke, me;
  const double h2 = h * h;
  ke << 12, 6 * h, -12, 6 * h,
        6 * h, 4 * h2, -6 * h, 2 * h2,
        -12, -6 * h, 12, -6 * h,
        6 * h, 2 * h2, -6 * h, 4 * h2;
  ke *= EI / (h2 * h);
  me << 156, 22 * h, 54, -13 * h,
        22 * h, 4 * h2, 13 * h, -3 * h2,
        54, 13 * h, 156, -22 * h,
        -13 * h, -3 * h2, -22 * h, 4 * h2;
  me *= rhoAh / 420.0;

  Matrix K = Matrix::Zero(ndof, ndof);
  Matrix M = Matrix::Zero(ndof, ndof);
  for (Index e = 0; e < ne; ++e) {
    const Index base = 2 * e;
    K.block<4, 4>(base, base) += ke;
    M.block<4, 4>(base, base) += me;
  }

  BeamMatrices out;
  if (spec.boundary == BeamBoundary::cantilever_left) {
    out.mass = M.bottomRightCorner(ndof - 2, ndof - 2);
    out.stiffness = K.bottomRightCorner(ndof - 2, ndof - 2);
  } else {
    out.mass = std::move(M);
    out.stiffness = std::move(K);
  }
  return out;
}

/// Modal state space from (M, K): mass-normalized mode shapes, per-mode
/// damping 2*zeta*w_i (rigid-body modes stay undamped), displacement
/// outputs. Flexible modes use the energy-scaled pair (q_i, qdot_i / w_i),
/// giving blocks [[0, w], [-w, -2 zeta w]]: the realization stays tridiagonal
/// for fast frequency sweeps while ||A|| grows like w_max instead of
/// w_max^2, which keeps Gramians and balancing well conditioned on stiff FE
/// meshes. n = 2 * (free dofs).
inline StateSpaceModel modal_damped_state_space(const Matrix& mass, const Matrix& stiffness,
                                                double zeta, const Matrix& input_map,
                                                const Matrix& output_map) {
  const Index nd = mass.rows();
  if (stiffness.rows() != nd || stiffness.cols() != nd || mass.cols() != nd)
    throw DimensionError("modal_damped_state_space: M/K size mismatch");
  if (input_map.rows() != nd || output_map.cols() != nd)
    throw DimensionError("modal_damped_state_space: I/O map size mismatch");
  if (!(zeta > 0.0) || !(zeta < 1.0))
    throw InvalidArgument("modal_damped_state_space: zeta must lie in (0,1)");

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(stiffness, mass);
  if (ges.info() != Eigen::Success)
    throw NumericalError("modal_damped_state_space: generalized eigensolver failed");
  const Vector lambda = ges.eigenvalues();  // ascending, Phi^T M Phi = I
  const Matrix& Phi = ges.eigenvectors();

  const double lam_scale = std::max(lambda.cwiseAbs().maxCoeff(), 1.0);
  const Index m = input_map.cols();
  const Index p = output_map.rows();
  const Matrix Bm = Phi.transpose() * input_map;  // modal force input
  const Matrix Cm = output_map * Phi;             // displacement read-out

  StateSpaceModel sys;
  sys.A = Matrix::Zero(2 * nd, 2 * nd);
  sys.B = Matrix::Zero(2 * nd, m);
  sys.C = Matrix::Zero(p, 2 * nd);
  sys.D = Matrix::Zero(p, m);
  for (Index i = 0; i < nd; ++i) {
    // Rigid-body eigenvalues are pure roundoff (eps * lam_max scale); stiff
    // FE meshes put the lowest bending mode only ~10 decades below lam_max,
    // so the cutoff sits between machine noise and any physical mode.
    const bool rigid = lambda(i) <= 3e-12 * lam_scale;
    if (rigid) {
      sys.A(2 * i, 2 * i + 1) = 1.0;  // plain double integrator
      sys.B.row(2 * i + 1) = Bm.row(i);
    } else {
      const double w = std::sqrt(lambda(i));
      sys.A(2 * i, 2 * i + 1) = w;
      sys.A(2 * i + 1, 2 * i) = -w;
      sys.A(2 * i + 1, 2 * i + 1) = -2.0 * zeta * w;
      sys.B.row(2 * i + 1) = Bm.row(i) / w;
    }
    sys.C.col(2 * i) = Cm.col(i);
  }
  return sys;
}

/// Unit selector matrices for a list of beam dofs.
inline Matrix dof_selector(const BeamSpec& spec, const BeamMatrices& mats,
                           const std::vector<BeamDof>& dofs) {
  const Index nd = mats.mass.rows();
  Matrix sel = Matrix::Zero(nd, static_cast<Index>(dofs.size()));
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    const Index fi = mats.free_index(spec, dofs[i]);
    if (fi < 0 || fi >= nd) throw InvalidArgument("dof_selector: dof not free");
    sel(fi, static_cast<Index>(i)) = 1.0;
  }
  return sel;
}

/// Beam spec -> damped modal state-space model with force inputs and
/// displacement outputs at the requested dofs.
inline StateSpaceModel beam_state_space(const BeamSpec& spec) {
  const BeamMatrices mats = beam_fe_matrices(spec);
  const Matrix B = dof_selector(spec, mats, spec.input_dofs);
  const Matrix C = dof_selector(spec, mats, spec.output_dofs).transpose();
  return modal_damped_state_space(mats.mass, mats.stiffness, spec.modal_damping_ratio, B, C);
}

}  // namespace modred
