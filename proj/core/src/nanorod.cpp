#include "phfem/nanorod.hpp"

#include <algorithm>
#include <cmath>

#include "phfem/csv.hpp"
#include "phfem/factorization.hpp"
#include "phfem/timeint.hpp"

namespace phfem::nanorod {

void Config::validate() const {
  if (!(E > 0.0)) throw InvalidArgument("nanorod: E must be positive");
  if (!(ell >= 0.0)) throw InvalidArgument("nanorod: ell must be non-negative");
  if (!(dt > 0.0)) throw InvalidArgument("nanorod: dt must be positive");
  if (!(t_final >= 0.0)) throw InvalidArgument("nanorod: t_final must be non-negative");
  if (nodes < 2) throw InvalidArgument("nanorod: need at least 2 nodes");
  if (!(b > a)) throw InvalidArgument("nanorod: empty interval");
  if (!rho || !v0 || !sigma0) throw InvalidArgument("nanorod: missing field function");
}

Model::Model(Config c) : cfg(std::move(c)), mesh((cfg.validate(), cfg.mesh())),
                         forms(assemble_forms(mesh, cfg.rho)) {
  Vector rb(2);
  rb << cfg.rho(cfg.a), cfg.rho(cfg.b);
  if (!(rb.minCoeff() > 0.0)) throw InvalidArgument("nanorod: non-positive boundary density");
  M_bd_rho = SparseMatrix::diagonal(rb);
  const double l = cfg.ell;
  SparseMatrix bbt = product(forms.B, forms.B.transpose());
  P_sigma = (1.0 / cfg.E) * (forms.M + (l * l) * forms.K + l * bbt);
  P_v = forms.M_rho + l * product(product(forms.B, M_bd_rho), forms.B.transpose());
}

namespace {

SparseMatrix dirac_robin(const Model& m) {
  const Index n = m.n();
  BlockBuilder bb({n, n}, {n, n});
  bb.set(0, 1, m.forms.D);
  bb.set(1, 0, m.forms.D.transpose(), -1.0);
  return bb.build();
}

SparseMatrix robin_pencil_mass(const Model& m) {
  const Index n = m.n();
  BlockBuilder bb({n, n}, {n, n});
  bb.set(0, 0, m.P_sigma);
  bb.set(1, 1, m.P_v);
  return bb.build();
}

Vector stack(const Vector& a, const Vector& b) {
  Vector z(a.size() + b.size());
  z << a, b;
  return z;
}

}  // namespace

PHSystemBundle build_system(const Model& m) {
  const Index n = m.n();
  PHSystemBundle b;
  b.P = robin_pencil_mass(m);
  BlockBuilder w({n, n}, {n, n});
  w.set(0, 0, m.forms.M);
  w.set(1, 1, m.forms.M);
  b.S = w.build();
  b.M_weight = b.S;
  b.J = dirac_robin(m);
  b.n = 2 * n;
  return b;
}

PHSystemBundle build_system_free(const Model& m) {
  const Index n = m.n();
  const double l2e = m.cfg.ell * m.cfg.ell / m.cfg.E;
  const SparseMatrix& B = m.forms.B;
  PHSystemBundle b;
  {
    BlockBuilder bb({n, n, 2}, {n, n, 2});
    bb.set(0, 0, (1.0 / m.cfg.E) * (m.forms.M + (m.cfg.ell * m.cfg.ell) * m.forms.K));
    bb.set(0, 2, B, -l2e);
    bb.set(1, 1, m.forms.M_rho);
    bb.set(2, 0, B.transpose(), -l2e);
    b.P = bb.build();
  }
  {
    BlockBuilder bb({n, n, 2}, {n, n, 2});
    bb.set(0, 0, m.forms.M);
    bb.set(1, 1, m.forms.M);
    bb.set(2, 2, m.forms.M_bd);
    b.S = bb.build();
    b.M_weight = b.S;
  }
  {
    // The power port u_D enters the velocity equation, so its column sits
    // next to v; the observation row is the matching negative transpose.
    BlockBuilder bb({n, n, 2}, {n, n, 2});
    bb.set(0, 1, m.forms.D);
    bb.set(1, 0, m.forms.D.transpose(), -1.0);
    bb.set(1, 2, B);
    bb.set(2, 1, B.transpose(), -1.0);
    b.J = bb.build();
  }
  {
    BlockBuilder bd({n, n}, {2});
    bd.set(1, 0, B);
    b.B_D = bd.build();
    BlockBuilder bl({n, n}, {2});
    bl.set(0, 0, B, l2e);
    b.B_L = bl.build();
  }
  b.n = 2 * n;
  b.n_L = 2;
  b.n_D = 2;
  b.r = 0;
  return b;
}

Vector observe_y_L(const Model& m, const State& s) {
  const double l2e = m.cfg.ell * m.cfg.ell / m.cfg.E;
  return -l2e * (m.forms.B.transpose() * s.sigma);
}

Vector observe_y_D(const Model& m, const State& s) { return -(m.forms.B.transpose() * s.v); }

Vector robin_u_L(const Model& m, const State& s) {
  if (m.cfg.ell == 0.0) return Vector::Zero(2);
  return -(m.forms.B.transpose() * s.sigma) / m.cfg.ell;
}

double hamiltonian_d(const Model& m, const State& s, const Vector& u_L) {
  if (s.sigma.size() != m.n() || s.v.size() != m.n() || u_L.size() != 2)
    throw DimensionError("hamiltonian_d: state length");
  PHSystemBundle b = build_system_free(m);
  Vector z(2 * m.n() + 2);
  z << s.sigma, s.v, u_L;
  return 0.5 * z.dot(b.P * z);
}

double hamiltonian_d_rob(const Model& m, const State& s) {
  if (s.sigma.size() != m.n() || s.v.size() != m.n())
    throw DimensionError("hamiltonian_d_rob: state length");
  return 0.5 * (s.sigma.dot(m.P_sigma * s.sigma) + s.v.dot(m.P_v * s.v));
}

Energies energies(const Model& m, const State& s) {
  Energies e;
  e.H_rob = hamiltonian_d_rob(m, s);
  const double l = m.cfg.ell;
  Vector bv = m.forms.B.transpose() * s.v;
  Vector bs = m.forms.B.transpose() * s.sigma;
  e.E_port_v = 0.5 * l * bv.dot(m.M_bd_rho * bv);
  e.E_port_sigma = 0.5 * l / m.cfg.E * bs.squaredNorm();
  e.H_bulk = e.H_rob - e.E_port_v - e.E_port_sigma;
  return e;
}

Vector explicit_kernel_apply(const Model& m, const Vector& eps) {
  const double l = m.cfg.ell;
  if (!(l > 0.0)) throw InvalidArgument("explicit_kernel_apply: ell must be positive");
  if (eps.size() != m.n()) throw DimensionError("explicit_kernel_apply: eps length");
  constexpr int kSub = 8;
  const Index n = m.n();
  Vector sigma = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    const double xi = m.mesh.node(i);
    double acc = 0.0;
    for (Index e = 0; e + 1 < n; ++e) {
      const double x0 = m.mesh.node(e), h = m.mesh.node(e + 1) - x0, hs = h / kSub;
      for (int s = 0; s < kSub; ++s) {
        const double ta = static_cast<double>(s) / kSub, tb = static_cast<double>(s + 1) / kSub;
        const double fa = (1.0 - ta) * eps[e] + ta * eps[e + 1];
        const double fb = (1.0 - tb) * eps[e] + tb * eps[e + 1];
        const double ka = std::exp(-std::abs(xi - (x0 + ta * h)) / l);
        const double kb = std::exp(-std::abs(xi - (x0 + tb * h)) / l);
        acc += 0.5 * hs * (ka * fa + kb * fb);
      }
    }
    sigma[i] = m.cfg.E * acc / (2.0 * l);
  }
  return sigma;
}

Vector implicit_kernel_apply(const Model& m, const Vector& eps) {
  if (eps.size() != m.n()) throw DimensionError("implicit_kernel_apply: eps length");
  Factorization f(m.cfg.E * m.P_sigma, true);
  return f.solve(m.cfg.E * (m.forms.M * eps));
}

State initial_state(const Model& m) {
  return {interpolate_p1(m.mesh, m.cfg.sigma0), interpolate_p1(m.mesh, m.cfg.v0), 0.0};
}

RunResult run(const Model& m) {
  const Index n = m.n();
  StepProblem p;
  p.mass = robin_pencil_mass(m);
  p.op = dirac_robin(m);
  MidpointStepper stepper(p);

  RunResult r;
  State s = initial_state(m);
  Energies e0 = energies(m, s);
  r.series.push_back({0.0, e0, 0.0});
  const double h0 = e0.H_rob;
  const int steps = static_cast<int>(std::ceil(m.cfg.t_final / m.cfg.dt - 1e-9));
  Vector x = stack(s.sigma, s.v);
  double prev = h0;
  for (int k = 0; k < steps; ++k) {
    const double dt = std::min(m.cfg.dt, m.cfg.t_final - k * m.cfg.dt);
    x = stepper.step(x, dt).x;
    s.sigma = x.head(n);
    s.v = x.tail(n);
    s.t = k + 1 == steps ? m.cfg.t_final : (k + 1) * m.cfg.dt;
    Energies e = energies(m, s);
    r.series.push_back({s.t, e, std::abs(e.H_rob - prev) / dt});
    prev = e.H_rob;
    double scale = h0 > 0.0 ? h0 : 1e-300;
    r.max_relative_drift = std::max(r.max_relative_drift, std::abs(e.H_rob - h0) / scale);
  }
  if (h0 == 0.0) r.max_relative_drift = 0.0;
  r.final_state = s;
  return r;
}

void write_csv(const std::string& path, const RunResult& r) {
  CsvWriter w(path, {"t", "H_rob", "H_bulk", "E_port_v", "E_port_sigma", "balance_residual"});
  for (const auto& s : r.series)
    w.row({s.t, s.e.H_rob, s.e.H_bulk, s.e.E_port_v, s.e.E_port_sigma, s.balance_residual});
}

}  // namespace phfem::nanorod
