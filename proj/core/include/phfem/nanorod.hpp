#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "phfem/fem1d.hpp"
#include "phfem/structures.hpp"

namespace phfem::nanorod {

struct Config {
  double E = 1.0;                   // Pa
  ScalarField1D rho = [](double) { return 10.0; };  // kg/m
  double ell = 0.0;                 // m
  double a = 0.0, b = 1.0;          // m
  Index nodes = 100;
  ScalarField1D v0 = [](double x) { return std::exp(-80.0 * (x - 0.3) * (x - 0.3)); };
  ScalarField1D sigma0 = [](double) { return 0.0; };
  double dt = 0.1;                  // s
  double t_final = 10.0;            // s

  void validate() const;
  Mesh1D mesh() const { return Mesh1D::uniform(a, b, nodes); }
};

struct State {
  Vector sigma, v;
  double t = 0.0;
};

/// Assembled matrices shared by every nanorod operation.
struct Model {
  Config cfg;
  Mesh1D mesh;
  Forms1D forms;
  SparseMatrix M_bd_rho;  // diag(rho(a), rho(b))
  SparseMatrix P_sigma;   // (1/E)(M + l^2 K + l B B^T)
  SparseMatrix P_v;       // M_rho + l B M_bd_rho B^T

  explicit Model(Config c);
  Index n() const { return mesh.size(); }
};

/// Robin form: P_Rob d/dt (sigma; v) = [[0, D], [-D^T, 0]] (sigma; v).
PHSystemBundle build_system(const Model& m);

/// Open-port form with energy port u_L (latent vector (sigma; v; u_L)) and
/// power port u_D entering the velocity equation.
PHSystemBundle build_system_free(const Model& m);

/// Port observations of the free form: M_bd y_L = -(l^2/E) B^T sigma and
/// M_bd y_D = -B^T v.
Vector observe_y_L(const Model& m, const State& s);
Vector observe_y_D(const Model& m, const State& s);

/// Energy-port value implied by the Robin condition B^T sigma + l M_bd u_L = 0.
Vector robin_u_L(const Model& m, const State& s);

struct Energies {
  double H_rob = 0.0;
  double H_bulk = 0.0;       // H_rob without the two boundary-stored terms
  double E_port_v = 0.0;     // (l/2) v^T B M_bd_rho B^T v
  double E_port_sigma = 0.0; // (l/(2E)) sigma^T B B^T sigma
};

double hamiltonian_d(const Model& m, const State& s, const Vector& u_L);
double hamiltonian_d_rob(const Model& m, const State& s);
Energies energies(const Model& m, const State& s);

/// sigma(x_i) = int (1/2l) exp(-|x_i - x'|/l) E eps(x') dx' by trapezoid
/// quadrature with every element split into 8 pieces (eps linearly
/// interpolated). Throws InvalidArgument for l = 0.
Vector explicit_kernel_apply(const Model& m, const Vector& eps);

/// Solves (M + l^2 K + l B B^T) sigma = E M eps.
Vector implicit_kernel_apply(const Model& m, const Vector& eps);

State initial_state(const Model& m);

struct Sample {
  double t;
  Energies e;
  double balance_residual;  // |H_rob(k+1) - H_rob(k)| / dt
};

struct RunResult {
  std::vector<Sample> series;
  State final_state;
  double max_relative_drift = 0.0;  // max_k |H_k - H_0| / max(1e-300, H_0)
};

RunResult run(const Model& m);

/// CSV header: t,H_rob,H_bulk,E_port_v,E_port_sigma,balance_residual
void write_csv(const std::string& path, const RunResult& r);

}  // namespace phfem::nanorod
