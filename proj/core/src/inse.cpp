#include "phfem/inse.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "phfem/csv.hpp"
#include "phfem/vtk.hpp"

namespace phfem::inse {

void Config::validate() const {
  if (!(rho0 > 0.0)) throw InvalidArgument("inse: rho0 must be positive");
  if (!(mu >= 0.0)) throw InvalidArgument("inse: mu must be non-negative");
  if (!(r0 > 0.0)) throw InvalidArgument("inse: r0 must be positive");
  if (!(dt > 0.0)) throw InvalidArgument("inse: dt must be positive");
  if (!(t_final >= 0.0)) throw InvalidArgument("inse: t_final must be non-negative");
  if (!std::isfinite(omega_e)) throw InvalidArgument("inse: omega_e must be finite");
  if (calibrate && !(target_K > 0.0)) throw InvalidArgument("inse: target_K must be positive");
  if (!(domain.x1 > domain.x0 && domain.y1 > domain.y0))
    throw InvalidArgument("inse: empty domain");
}

Mesh2D Config::mesh() const { return build_mesh(domain, nx, ny, grading); }

namespace {

double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

double rel(double residual, double scale) {
  return std::abs(residual) / std::max(std::abs(scale), 1e-300);
}

}  // namespace

Solver::Solver(Config c)
    : cfg_((c.validate(), std::move(c))),
      sp_(cfg_.mesh()),
      f_(assemble_static(sp_)),
      ma_(sp_),
      B1t_(f_.B1.transpose()),
      B3t_(f_.B3.transpose()),
      B5t_(f_.B5.transpose()),
      omega_e_(cfg_.omega_e) {}

double Solver::kinetic(const Vector& psi) const {
  return 0.5 * cfg_.rho0 * psi.dot(f_.K * psi);
}

double Solver::enstrophy(const Vector& omega) const {
  return 0.5 * cfg_.rho0 * omega.dot(f_.M * omega);
}

SparseMatrix Solver::D1(const Vector& omega) const { return ma_.D1(omega); }
SparseMatrix Solver::D2(const Vector& psi) const { return ma_.D2(psi); }

State Solver::initial_conditions() {
  auto monopole = [r0 = cfg_.r0](double x, double y, const std::array<double, 2>& c) {
    const double q = ((x - c[0]) * (x - c[0]) + (y - c[1]) * (y - c[1])) / (r0 * r0);
    return (1.0 - q) * std::exp(-q);
  };
  Vector shape = interpolate_omega(sp_, [&](double x, double y) {
    return monopole(x, y, cfg_.c1) - monopole(x, y, cfg_.c2);
  });
  Vector psi_shape = solve_poisson_dirichlet(sp_, f_, shape);
  if (cfg_.calibrate) {
    const double k1 = kinetic(psi_shape);
    if (!(k1 > 0.0)) throw InvalidArgument("inse: calibration needs a non-zero initial field");
    omega_e_ = std::sqrt(cfg_.target_K / k1);
  }
  State s;
  s.omega = omega_e_ * shape;
  s.psi = omega_e_ * psi_shape;
  const Index m = sp_.n_trace();
  s.u1 = Vector::Zero(m);
  s.u1_prev = Vector::Zero(m);
  s.u5 = Vector::Zero(m);
  s.u_tilde = Vector::Zero(m);
  s.lam_psi = Vector::Zero(2 * m);
  s.lam_omega = Vector::Zero(m);
  return s;
}

// psi rows of the saddle system
//   [rho0 K - h/2 A1   B1  B3] [psi_new]   [(rho0 K + h/2 A1) psi_old]
//   [B1^T               0   0] [alpha  ] = [0]
//   [B3^T               0   0] [beta   ]   [0]
// with A1 = rho0 D1(omega) - mu R1. The multiplier columns absorb the
// Dirichlet multiplier (alpha = -h u~) and the wall vorticity
// (beta = h mu u1).
void Solver::psi_substep(State& s, double h, const SparseMatrix& d1) {
  const Index n = sp_.n_psi(), m = sp_.n_trace();
  const double r = cfg_.rho0, mu = cfg_.mu;
  SparseMatrix a1 = axpby(r, d1, -mu, f_.R1);
  SparseMatrix lhs = axpby(r, f_.K, -0.5 * h, a1);
  BlockBuilder bb({n, m, m}, {n, m, m});
  bb.set(0, 0, lhs);
  bb.set(0, 1, f_.B1);
  bb.set(0, 2, f_.B3);
  bb.set(1, 0, B1t_);
  bb.set(2, 0, B3t_);
  SparseMatrix pencil = bb.build();
  const bool reuse = cfg_.freeze_modulation && psi_lu_ && psi_lu_h_ == h;
  if (!reuse) {
    if (psi_lu_)
      psi_lu_->refactor(pencil);
    else
      psi_lu_.emplace(pencil, false);
    psi_lu_h_ = h;
  }
  Vector rhs = Vector::Zero(n + 2 * m);
  rhs.head(n) = r * (f_.K * s.psi) + (0.5 * h) * (a1 * s.psi);
  Vector sol = psi_lu_->solve(rhs);

  s.psi_prev = std::move(s.psi);
  s.psi = sol.head(n);
  s.lam_psi = sol.tail(2 * m);
  s.u_tilde = -sol.segment(n, m) / h;
  s.u1_prev = s.u1;
  s.u1 = mu > 0.0 ? Vector(sol.tail(m) / (h * mu)) : Vector::Zero(m);
  s.t_psi += h;
  s.h_psi = h;
  if (!s.psi.allFinite()) throw ConvergenceError("inse: non-finite stream function");
}

Vector Solver::boundary_target(const State& s, double h) const {
  if (!cfg_.extrapolate_boundary || s.h_psi <= 0.0 || s.u1_prev.size() == 0) return s.u1;
  // u1 lives at t_psi; the target sits at t_omega + h.
  const double theta = (s.t_omega + h - s.t_psi) / s.h_psi;
  return s.u1 + theta * (s.u1 - s.u1_prev);
}

// omega rows
//   [rho0 M - h/2 A2   B5] [omega_new]   [(rho0 M + h/2 A2) omega_old]
//   [B5^T               0] [q        ] = [M_bd u1]
// with A2 = rho0 D2(psi) - mu R2 and q = -h mu u5. Without viscosity the
// wall trace is free and the constraint is dropped.
void Solver::omega_substep(State& s, double h, const SparseMatrix& d2) {
  const Index n = sp_.n_omega(), m = sp_.n_trace();
  const double r = cfg_.rho0, mu = cfg_.mu;
  const bool constrained = mu > 0.0;
  SparseMatrix a2 = axpby(r, d2, -mu, f_.R2);
  SparseMatrix lhs = axpby(r, f_.M, -0.5 * h, a2);
  SparseMatrix pencil;
  if (constrained) {
    BlockBuilder bb({n, m}, {n, m});
    bb.set(0, 0, lhs);
    bb.set(0, 1, f_.B5);
    bb.set(1, 0, B5t_);
    pencil = bb.build();
  } else {
    pencil = lhs;
  }
  const bool reuse = cfg_.freeze_modulation && omega_lu_ && omega_lu_h_ == h;
  if (!reuse) {
    if (omega_lu_)
      omega_lu_->refactor(pencil);
    else
      omega_lu_.emplace(pencil, false);
    omega_lu_h_ = h;
  }
  const Index rows = constrained ? n + m : n;
  Vector rhs = Vector::Zero(rows);
  rhs.head(n) = r * (f_.M * s.omega) + (0.5 * h) * (a2 * s.omega);
  if (constrained) rhs.tail(m) = f_.M_bd * boundary_target(s, h);
  Vector sol = omega_lu_->solve(rhs);

  s.omega = sol.head(n);
  s.lam_omega = constrained ? Vector(sol.tail(m)) : Vector::Zero(m);
  s.u5 = constrained ? Vector(-sol.tail(m) / (h * mu)) : Vector::Zero(m);
  s.t_omega += h;
  s.h_omega = h;
  if (!s.omega.allFinite()) throw ConvergenceError("inse: non-finite vorticity");
}

Ledger Solver::initialize_half_step(State& s) {
  if (cfg_.freeze_modulation) {
    d1_frozen_ = ma_.D1(s.omega);
    d2_frozen_ = ma_.D2(s.psi);
  }
  State prev = s;
  const double h = 0.5 * cfg_.dt;
  psi_substep(s, h, cfg_.freeze_modulation ? *d1_frozen_ : ma_.D1(s.omega));
  // Only the psi half of the ledger is meaningful here.
  Ledger l = ledger(*this, prev, s);
  l.t = s.t_omega;
  l.K = kinetic(prev.psi);
  l.E = enstrophy(s.omega);
  l.dE = l.diss_E = l.gen_E_boundary = l.res_enstrophy = 0.0;
  return l;
}

Ledger Solver::step(State& s, double h) {
  if (s.psi_prev.size() == 0) throw InvalidArgument("inse: step before initialize_half_step");
  if (h <= 0.0) h = cfg_.dt;
  State prev = s;
  omega_substep(s, h, cfg_.freeze_modulation ? *d2_frozen_ : ma_.D2(s.psi));
  psi_substep(s, h, cfg_.freeze_modulation ? *d1_frozen_ : ma_.D1(s.omega));
  return ledger(*this, prev, s);
}

Ledger ledger(const Solver& solver, const State& prev, const State& next) {
  const Forms2D& f = solver.forms();
  const double mu = solver.config().mu;
  const Index m = solver.spaces().n_trace();
  Ledger l;
  l.t = next.t_omega;

  // Enstrophy over the omega step (absent when only psi moved).
  const double e0 = solver.enstrophy(prev.omega), e1 = solver.enstrophy(next.omega);
  l.E = e1;
  if (next.t_omega > prev.t_omega) {
    const double h = next.t_omega - prev.t_omega;
    Vector wm = 0.5 * (prev.omega + next.omega);
    l.dE = e1 - e0;
    l.diss_E = h * mu * wm.dot(f.R2 * wm);
    l.gen_E_boundary = -(f.B5.transpose() * wm).dot(next.lam_omega);
    l.res_enstrophy = rel(l.dE + l.diss_E - l.gen_E_boundary, std::max(e0, e1));
  }

  // Kinetic energy over the psi step.
  const double k0 = solver.kinetic(prev.psi), k1 = solver.kinetic(next.psi);
  if (next.t_psi > prev.t_psi) {
    const double h = next.t_psi - prev.t_psi;
    Vector pm = 0.5 * (prev.psi + next.psi);
    l.dK = k1 - k0;
    l.diss_K = h * mu * pm.dot(f.R1 * pm);
    l.work_K_boundary = -(f.B1.transpose() * pm).dot(next.lam_psi.head(m)) -
                        (f.B3.transpose() * pm).dot(next.lam_psi.tail(m));
    l.res_power = rel(l.dK + l.diss_K - l.work_K_boundary, std::max(k0, k1));
    l.K = solver.kinetic(pm);
  } else {
    l.K = k1;
  }
  l.b1_norm = inf_norm(f.B1.transpose() * next.psi);
  l.b3_norm = inf_norm(f.B3.transpose() * next.psi);
  l.psi_inf = inf_norm(next.psi);
  return l;
}

PHSystemBundle Solver::frozen_system(const State& s) const {
  const Index np = sp_.n_psi(), nw = sp_.n_omega(), m = sp_.n_trace(), n = np + nw;
  const double r = cfg_.rho0, mu = cfg_.mu;
  PHSystemBundle b;
  {
    BlockBuilder bb({np, nw}, {np, nw});
    bb.set(0, 0, f_.K, r);
    bb.set(1, 1, f_.M, r);
    b.P = bb.build();
  }
  b.S = SparseMatrix::identity(n);
  b.M_weight = b.S;
  {
    BlockBuilder bb({np, nw}, {m, m, m, m});
    bb.set(0, 0, f_.B1, mu);
    bb.set(0, 1, f_.B3, mu);
    bb.set(0, 2, f_.B3);
    bb.set(1, 3, f_.B5, mu);
    b.B_D = bb.build();
  }
  {
    BlockBuilder bb({np, nw}, {np, nw});
    bb.set(0, 0, f_.R1, mu);
    bb.set(1, 1, f_.R2, mu);
    b.R = bb.build();
  }
  {
    // Flows (z; f_R; y_D) against efforts (e; e_R; u_D); the resistive
    // port is closed by e_R = R f_R.
    SparseMatrix id = SparseMatrix::identity(n);
    BlockBuilder ss({np, nw}, {np, nw});
    ss.set(0, 0, ma_.D1(s.omega), r);
    ss.set(1, 1, ma_.D2(s.psi), r);
    BlockBuilder bb({n, n, 4 * m}, {n, n, 4 * m});
    bb.set(0, 0, ss.build());
    bb.set(0, 1, id, -1.0);
    bb.set(1, 0, id);
    bb.set(0, 2, b.B_D);
    bb.set(2, 0, b.B_D.transpose(), -1.0);
    b.J = bb.build();
  }
  b.n = n;
  b.r = n;
  b.n_D = 4 * m;
  b.n_L = 0;
  return b;
}

const Ledger& RunResult::at(double t) const {
  if (series.empty()) throw InvalidArgument("inse: empty run");
  return *std::min_element(series.begin(), series.end(), [t](const Ledger& a, const Ledger& b) {
    return std::abs(a.t - t) < std::abs(b.t - t);
  });
}

void write_ledger_csv(const std::string& path, const std::vector<Ledger>& rows) {
  CsvWriter w(path, {"t", "K", "E", "diss_K", "diss_E", "gen_E_boundary", "res_power",
                     "res_enstrophy", "B1t_psi_inf", "B3t_psi_inf"});
  for (const Ledger& l : rows)
    w.row({l.t, l.K, l.E, l.diss_K, l.diss_E, l.gen_E_boundary, l.res_power, l.res_enstrophy,
           l.b1_norm, l.b3_norm});
}

void write_vtk(const std::string& path, const Solver& solver, const State& s) {
  const Spaces2D& sp = solver.spaces();
  std::vector<double> xs(static_cast<std::size_t>(sp.omega_nx()));
  std::vector<double> ys(static_cast<std::size_t>(sp.omega_ny()));
  for (Index i = 0; i < sp.omega_nx(); ++i) xs[i] = sp.omega_x(i);
  for (Index j = 0; j < sp.omega_ny(); ++j) ys[j] = sp.omega_y(j);
  Vector psi(sp.n_omega());
  for (Index j = 0; j < sp.omega_ny(); ++j)
    for (Index i = 0; i < sp.omega_nx(); ++i)
      psi[sp.omega_dof(i, j)] = evaluate_psi(sp, s.psi, xs[i], ys[j]);
  write_vtk_structured(path, xs, ys, {{"omega", s.omega}, {"psi", psi}}, "inse");
}

namespace {

std::string time_tag(double t) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.setf(std::ios::fixed);
  os.precision(4);
  os << t;
  return os.str();
}

}  // namespace

RunResult run(Solver& solver, const RunOptions& opt) {
  const Config& c = solver.config();
  const Spaces2D& sp = solver.spaces();
  namespace fs = std::filesystem;
  const bool files = !opt.out_dir.empty();
  if (files) fs::create_directories(opt.out_dir);

  std::unique_ptr<CsvWriter> profile;
  if (files)
    profile = std::make_unique<CsvWriter>((fs::path(opt.out_dir) / "boundary_profile.csv").string(),
                                          std::vector<std::string>{"t", "s", "y", "omega"});
  std::vector<double> snaps = c.snapshots;
  std::sort(snaps.begin(), snaps.end());
  std::size_t next_snap = 0;
  auto take_snapshots = [&](const State& s) {
    for (; next_snap < snaps.size() && snaps[next_snap] <= s.t_omega + 0.5 * c.dt; ++next_snap) {
      if (!files) continue;
      write_vtk((fs::path(opt.out_dir) / ("omega_t" + time_tag(snaps[next_snap]) + ".vtk")).string(),
                solver, s);
      // Right wall, bottom to top; s is arc length along the counter-clockwise loop.
      const Rect r = sp.mesh().bounds();
      const Index I = sp.omega_nx() - 1;
      for (Index J = 0; J < sp.omega_ny(); ++J) {
        const double y = sp.omega_y(J);
        profile->row({s.t_omega, (r.x1 - r.x0) + (y - r.y0), y, s.omega[sp.omega_dof(I, J)]});
      }
    }
  };

  RunResult out;
  State s = solver.initial_conditions();
  out.omega_e = solver.omega_e();
  Ledger l0;
  l0.K = solver.kinetic(s.psi);
  l0.E = solver.enstrophy(s.omega);
  l0.psi_inf = inf_norm(s.psi);
  l0.b1_norm = inf_norm(solver.forms().B1.transpose() * s.psi);
  l0.b3_norm = inf_norm(solver.forms().B3.transpose() * s.psi);
  out.series.push_back(l0);
  if (opt.progress) opt.progress(l0);
  take_snapshots(s);

  out.half_step = solver.initialize_half_step(s);
  const int steps = static_cast<int>(std::ceil(c.t_final / c.dt - 1e-9));
  for (int k = 0; k < steps; ++k) {
    Ledger l = solver.step(s);
    out.series.push_back(l);
    out.max_res_power = std::max(out.max_res_power, l.res_power);
    out.max_res_enstrophy = std::max(out.max_res_enstrophy, l.res_enstrophy);
    if (l.psi_inf > 0.0)
      out.max_constraint = std::max(out.max_constraint, std::max(l.b1_norm, l.b3_norm) / l.psi_inf);
    if (opt.progress) opt.progress(l);
    take_snapshots(s);
  }
  out.steps = steps;
  out.final_state = std::move(s);
  if (files) write_ledger_csv((fs::path(opt.out_dir) / "ledger.csv").string(), out.series);
  return out;
}

}  // namespace phfem::inse
