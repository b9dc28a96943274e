#pragma once

#include <string>
#include <vector>

#include "phfem/fem1d.hpp"
#include "phfem/structures.hpp"

namespace phfem::beam {

struct Config {
  double rho = 7.86e3;     // kg/m^3
  double E = 2.02e11;      // Pa
  double nu = 0.3;
  double radius = 0.05;    // m
  double a = 0.0, b = 1.0; // m
  double dx = 5e-4;        // m
  bool implicit = true;    // keep the rotary-inertia (h^3/12) terms
  /// Multiplies every rho h^3/12 term; 1 is the physical model. Used to take
  /// the singular-perturbation limit towards the explicit beam.
  double rotary_inertia_scale = 1.0;
  double dt0 = 1e-6;       // s
  double t_final = 1e-2;   // s
  double tol = 1e-8;       // relative local error for adaptive CN
  double bump_amplitude = 1e-3;  // m
  double bump_width = 80.0;      // 1/m^2
  double bump_center = 0.5;      // m
  std::vector<double> snapshots; // s

  void validate() const;
  bool operator==(const Config&) const = default;
  double h() const;         // pi r^2, m^2
  double D() const;         // E h^3 / (12 (1 - nu^2)), N m
  double inertia() const;   // effective rho h^3 / 12 (0 for the explicit model)
  Index nodes() const;
};

struct Model {
  Config cfg;
  Mesh1D mesh;
  Forms1D forms;
  SparseMatrix A_v;                 // rho h M + inertia K, full size
  std::vector<Index> interior;      // free dofs after simply supported elimination
  SparseMatrix M_ii, K_ii, A_v_ii;

  explicit Model(Config c);
  Index n() const { return mesh.size(); }
};

/// Unknowns (sigma; v; y_L; y1_D; y2_D). P, J, S = M_weight =
/// Diag(M, M, M_bd, M_bd, M_bd), labels n = 2N+4, n_L = 2, n_D = 2, r = 0.
/// B_L carries the du_L/dt column block; the full input map is input_map().
PHSystemBundle build_system(const Model& m);
/// (2N+6) x 6 map for (du_L/dt, u1_D, u2_D).
SparseMatrix input_map(const Model& m);

struct State {
  Vector sigma, v, w;  // full length N
  Vector y_L, y1_D, y2_D;
  double t = 0.0;
};

double hamiltonian_d1(const Model& m, const State& s);
double hamiltonian_d2(const Model& m, const State& s);

State initial_state(const Model& m);

struct Sample {
  double t, H1, H2, res1, res2, dt;
};

struct Snapshot {
  double t;
  Vector w;
};

struct RunResult {
  std::vector<Sample> series;
  std::vector<Snapshot> snapshots;  // at cfg.snapshots, in order
  State final_state;
  double max_relative_variation_H1 = 0.0;
  double max_relative_variation_H2 = 0.0;
  long steps = 0, rejected = 0;
};

RunResult run(const Model& m);

struct PhaseVelocity {
  int mode;
  double k, c_num, c_ana, rel_err;
};

/// Modal analysis of the simply supported pencil
///   D K M^-1 K x = w^2 (rho h M + inertia K) x
/// on interior dofs; mode n is mapped to k = n pi / L.
std::vector<PhaseVelocity> phase_velocity_table(const Model& m, int k_count);
double analytic_phase_velocity(const Config& c, double k);

/// ||w_1 - w_2||_L2 at the shared snapshot times. Both models must use the
/// same mesh and snapshot schedule.
std::vector<std::pair<double, double>> compare_models(const Model& m1, const Model& m2);
std::vector<std::pair<double, double>> compare_runs(const Model& m, const RunResult& r1,
                                                    const RunResult& r2);

void write_series_csv(const std::string& path, const RunResult& r);
void write_snapshots_csv(const std::string& path, const Model& m, const RunResult& r);
void write_phase_csv(const std::string& path, const std::vector<PhaseVelocity>& t);

}  // namespace phfem::beam
