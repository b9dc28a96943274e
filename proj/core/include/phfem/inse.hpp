#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "phfem/factorization.hpp"
#include "phfem/fem2d.hpp"
#include "phfem/structures.hpp"

namespace phfem::inse {

struct Config {
  double rho0 = 1.0;             // kg/m^3
  double mu = 1.0 / 625.0;       // Pa s
  Rect domain{};                 // m
  Index nx = 48, ny = 48;
  double grading = 1.15;
  std::array<double, 2> c1{0.0, 0.1}, c2{0.0, -0.1};  // monopole centres, m
  double r0 = 0.1;               // m
  double omega_e = 300.0;        // 1/s
  /// Rescale omega_e so that the discrete kinetic energy at t = 0 equals
  /// target_K.
  bool calibrate = false;
  double target_K = 2.0;         // J
  double dt = 1.0 / 600.0;       // s
  double t_final = 2.5;          // s
  /// Assemble D1 and D2 once from the initial state and keep them.
  bool freeze_modulation = false;
  /// Boundary vorticity target for the omega step: false uses the latest
  /// half-step value, true extrapolates linearly to the whole step.
  bool extrapolate_boundary = false;
  std::vector<double> snapshots;  // s

  void validate() const;
  bool operator==(const Config&) const = default;
  Mesh2D mesh() const;
};

/// Staggered state: psi at t_psi = t_omega + dt/2 once initialized.
///
/// The raw multipliers are the pencil unknowns, already multiplied by the
/// step length h: lam_psi = (alpha; beta) pairs with (B1, B3) and lam_omega
/// with B5. The physical port values follow from them:
///   u_tilde = -alpha / h,  u1 = beta / (h mu),  u5 = -lam_omega / (h mu).
struct State {
  Vector psi, omega;
  Vector psi_prev;             // psi one half-step earlier (empty before init)
  Vector u1, u1_prev, u5, u_tilde;
  Vector lam_psi, lam_omega;
  double t_psi = 0.0, t_omega = 0.0;
  double h_psi = 0.0, h_omega = 0.0;  // length of the last substeps
};

/// Balance terms over one staggered pair. Times and K refer to whole steps;
/// K is evaluated at the average of the two bracketing half-step psi.
struct Ledger {
  double t = 0.0;
  double K = 0.0, E = 0.0;
  double dK = 0.0, dE = 0.0;
  double diss_K = 0.0, diss_E = 0.0;
  double work_K_boundary = 0.0;  // multiplier work in the psi step
  double gen_E_boundary = 0.0;
  double res_power = 0.0, res_enstrophy = 0.0;  // relative
  double b1_norm = 0.0, b3_norm = 0.0;          // ||B^T psi||_inf after the psi step
  double psi_inf = 0.0;
};

class Solver {
 public:
  explicit Solver(Config c);

  const Config& config() const { return cfg_; }
  const Spaces2D& spaces() const { return sp_; }
  const Forms2D& forms() const { return f_; }
  double omega_e() const { return omega_e_; }

  double kinetic(const Vector& psi) const;
  double enstrophy(const Vector& omega) const;

  /// Nodal vorticity of the two monopoles and its Dirichlet stream function.
  /// With calibration on, omega_e is rescaled on the first call.
  State initial_conditions();

  /// psi: t0 -> t0 + dt/2 with D1 frozen at omega(t0). Returns the ledger
  /// of that half step (t, K and E refer to t0).
  Ledger initialize_half_step(State& s);

  /// omega: t_k -> t_k+1 with D2(psi_{k+1/2}), then psi: t_{k+1/2} ->
  /// t_{k+3/2} with D1(omega_{k+1}). `h` defaults to cfg.dt.
  Ledger step(State& s, double h = 0.0);

  /// Modulation frozen at `s`, ports (mu B1, mu B3, B3 | mu B5).
  PHSystemBundle frozen_system(const State& s) const;

  SparseMatrix D1(const Vector& omega) const;
  SparseMatrix D2(const Vector& psi) const;

 private:
  void psi_substep(State& s, double h, const SparseMatrix& d1);
  void omega_substep(State& s, double h, const SparseMatrix& d2);
  Vector boundary_target(const State& s, double h) const;

  Config cfg_;
  Spaces2D sp_;
  Forms2D f_;
  ModulatedAssembler ma_;
  SparseMatrix B1t_, B3t_, B5t_;
  double omega_e_;
  std::optional<SparseMatrix> d1_frozen_, d2_frozen_;
  // One handle per (h, operator) kind so refactoring reuses the analysis.
  std::optional<Factorization> psi_lu_, omega_lu_;
  double psi_lu_h_ = -1.0, omega_lu_h_ = -1.0;
};

/// Energy and enstrophy bookkeeping between two consecutive states, from
/// the multipliers stored in `next`.
Ledger ledger(const Solver& solver, const State& prev, const State& next);

struct RunOptions {
  std::string out_dir;  // empty: no files
  std::function<void(const Ledger&)> progress;
};

struct RunResult {
  std::vector<Ledger> series;  // row 0 is t = 0
  Ledger half_step;
  double omega_e = 0.0;
  double max_res_power = 0.0, max_res_enstrophy = 0.0;
  double max_constraint = 0.0;  // max ||B^T psi||_inf / ||psi||_inf
  int steps = 0;
  State final_state;

  /// Ledger row closest to time t.
  const Ledger& at(double t) const;
};

/// Full benchmark run. With an output directory writes ledger.csv,
/// boundary_profile.csv and omega_<t>.vtk at the snapshot times.
RunResult run(Solver& solver, const RunOptions& opt = {});

void write_ledger_csv(const std::string& path, const std::vector<Ledger>& rows);
void write_vtk(const std::string& path, const Solver& solver, const State& s);

}  // namespace phfem::inse
