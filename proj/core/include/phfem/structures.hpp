#pragma once

#include <string>

#include "phfem/sparse.hpp"

namespace phfem {

/// Matrix set of one linear port-Hamiltonian DAE
///
///   P d/dt z = J e - ...,   S z = M_weight e,
///
/// with z = (lambda; u_L) of size n + n_L, J of size n + r + n_D, resistive
/// block R of size r. M_weight may be left empty, meaning identity.
struct PHSystemBundle {
  SparseMatrix P, S, J, R, M_weight, B_D, B_L;
  Index n = 0, n_L = 0, n_D = 0, r = 0;

  /// Throws DimensionError when blocks and labels disagree.
  void check_dimensions() const;
  SparseMatrix weight() const;
};

struct StructureTolerances {
  double skew = 0.0;          // relative to ||J||_max
  double symmetry = 1e-12;    // relative to ||P^T M^-1 S||_max
  double resistive = 1e-12;   // relative to ||R||_max
  Index dense_limit = 2000;
};

struct StructureReport {
  double skew_violation = 0.0;              // ||J + J^T||_max
  double symmetry_violation = 0.0;          // ||P^T M^-1 S - S^T M^-1 P||_max
  double symmetry_scale = 0.0;              // ||P^T M^-1 S||_max
  double resistive_symmetry_violation = 0.0;
  double min_rayleigh_R = 0.0;              // smallest eigenvalue (or certificate bound)
  bool skew_ok = false, symmetry_ok = false, resistive_ok = false, rank_ok = false;
  std::string rank_method;

  bool passed() const { return skew_ok && symmetry_ok && resistive_ok && rank_ok; }
  std::string summary() const;
};

StructureReport verify_structure(const PHSystemBundle& b, const StructureTolerances& tol = {});

struct LatentPair {
  Vector lambda;
  Vector u_tilde;
};

/// Least-squares solve of [P; S](lambda; u~) = (alpha; u_L; e; y_L).
/// Throws ConsistencyError when the residual exceeds `rel_tol` times the
/// input norm, which signals data that does not lie on the Lagrange subspace.
LatentPair recover_latent(const PHSystemBundle& b, const Vector& alpha, const Vector& u_L,
                          const Vector& e, const Vector& y_L, double rel_tol = 1e-10);

/// 1/2 z^T P^T M^-1 S z with z = (lambda; u~).
double hamiltonian(const PHSystemBundle& b, const LatentPair& lp);

struct PortSnapshot {
  Vector u_D, y_D, u_L, y_L, f_R, e_R;
  double time = 0.0;
};

/// |dH/dt - (-f_R^T R f_R + y_D^T u_D + y_L^T du_L/dt)| over one step, with
/// port values taken at the midpoint of the two snapshots.
double power_balance_residual(const PHSystemBundle& b, const LatentPair& z0, const LatentPair& z1,
                              const PortSnapshot& p0, const PortSnapshot& p1);

}  // namespace phfem
