#include "phfem/timeint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace phfem {

namespace {

SparseMatrix build_pencil(const StepProblem& p, double dt) {
  const Index n = p.size(), m = p.constraints();
  SparseMatrix a = axpby(1.0, p.mass, -0.5 * dt, p.op);
  if (m == 0) return a;
  BlockBuilder bb({n, m}, {n, m});
  bb.set(0, 0, a);
  bb.set(0, 1, p.G);
  bb.set(1, 0, p.C);
  return bb.build();
}

void check_problem(const StepProblem& p) {
  const Index n = p.size();
  if (p.mass.cols() != n || p.op.rows() != n || p.op.cols() != n)
    throw DimensionError("StepProblem: mass and operator must be n x n");
  const Index m = p.constraints();
  if (m > 0 && (p.C.cols() != n || p.G.rows() != n || p.G.cols() != m))
    throw DimensionError("StepProblem: G must be n x m and C m x n");
  if (m == 0 && !p.G.empty() && p.G.cols() != 0)
    throw DimensionError("StepProblem: multiplier columns without constraint rows");
}

Vector explicit_side(const StepProblem& p, const Vector& x, double dt, const Vector& f,
                     const Vector& g) {
  const Index n = p.size(), m = p.constraints();
  if (x.size() != n) throw DimensionError("midpoint step: state length");
  Vector rhs(n + m);
  rhs.head(n) = p.mass * x + (0.5 * dt) * (p.op * x);
  if (f.size() > 0) {
    if (f.size() != n) throw DimensionError("midpoint step: forcing length");
    rhs.head(n) += dt * f;
  }
  if (m > 0) {
    if (g.size() > 0 && g.size() != m) throw DimensionError("midpoint step: constraint length");
    rhs.tail(m) = g.size() > 0 ? g : Vector::Zero(m);
  }
  return rhs;
}

// Rounds down to 2^(j/8). Proposed step sizes snap to a fixed ladder so the
// pencil cache gets hits instead of a fresh factorization every step.
double ladder(double dt) {
  double j = std::floor(8.0 * std::log2(dt));
  double r = std::exp2(j / 8.0);
  return r > dt ? std::exp2((j - 1.0) / 8.0) : r;
}

StepResult split(const StepProblem& p, const Vector& sol) {
  return {sol.head(p.size()), sol.tail(p.constraints())};
}

}  // namespace

MidpointStepper::MidpointStepper(StepProblem p) : p_(std::move(p)) { check_problem(p_); }

void MidpointStepper::set_operator(SparseMatrix op) {
  if (op.rows() != p_.size() || op.cols() != p_.size())
    throw DimensionError("set_operator: operator must be n x n");
  p_.op = std::move(op);
  // Keep one handle so the symbolic analysis survives when patterns match.
  if (!cache_.empty()) {
    auto keep = std::max_element(used_.begin(), used_.end(),
                                 [](auto& a, auto& b) { return a.second < b.second; })->first;
    Factorization f = std::move(cache_.at(keep));
    cache_.clear();
    used_.clear();
    f.refactor(build_pencil(p_, keep));
    cache_.emplace(keep, std::move(f));
    used_[keep] = ++clock_;
  }
}

const Factorization& MidpointStepper::pencil(double dt) {
  auto it = cache_.find(dt);
  if (it != cache_.end()) {
    used_[dt] = ++clock_;
    return it->second;
  }
  if (cache_.size() >= 4) {
    auto lru = std::min_element(used_.begin(), used_.end(),
                                [](auto& a, auto& b) { return a.second < b.second; })->first;
    cache_.erase(lru);
    used_.erase(lru);
  }
  auto [pos, ok] = cache_.emplace(dt, Factorization(build_pencil(p_, dt), false));
  (void)ok;
  used_[dt] = ++clock_;
  return pos->second;
}

StepResult MidpointStepper::step(const Vector& x, double dt, const Vector& forcing_mid,
                                 const Vector& constraint_rhs) {
  if (!(dt > 0.0)) throw InvalidArgument("midpoint step: dt must be positive");
  Vector rhs = explicit_side(p_, x, dt, forcing_mid, constraint_rhs);
  return split(p_, pencil(dt).solve(rhs));
}

StepResult implicit_midpoint(const StepProblem& p, const Vector& x, double dt,
                             const Vector& forcing_mid, const Vector& constraint_rhs) {
  check_problem(p);
  if (!(dt > 0.0)) throw InvalidArgument("implicit_midpoint: dt must be positive");
  Factorization f(build_pencil(p, dt), false);
  return split(p, f.solve(explicit_side(p, x, dt, forcing_mid, constraint_rhs)));
}

AdaptiveStep crank_nicolson_adaptive(MidpointStepper& stepper, const Vector& x, double dt,
                                     const AdaptiveOptions& opt, double dt_floor) {
  const StepProblem& p = stepper.problem();
  const SparseMatrix& w = p.error_weight.empty() ? p.mass : p.error_weight;
  auto seminorm = [&](const Vector& v) { return std::sqrt(std::max(0.0, v.dot(w * v))); };
  AdaptiveStep out;
  for (;;) {
    if (opt.max_dt > 0.0) dt = std::min(dt, opt.max_dt);
    if (dt < dt_floor)
      throw ConvergenceError("crank_nicolson_adaptive: step size underflow (dt=" +
                             std::to_string(dt) + ")");
    Vector full = stepper.step(x, dt).x;
    double err = 0.0;
    if (std::isfinite(opt.tol)) {
      Vector half = stepper.step(stepper.step(x, 0.5 * dt).x, 0.5 * dt).x;
      double scale = std::max(seminorm(full), std::numeric_limits<double>::min());
      err = seminorm(full - half) / scale;
    }
    double factor = err > 0.0 ? std::cbrt(opt.tol / err) : opt.max_factor;
    factor = std::clamp(factor, opt.min_factor, opt.max_factor);
    if (err <= opt.tol) {
      out.x = std::move(full);
      out.dt_used = dt;
      out.error = err;
      out.dt_next = ladder(dt * factor);
      return out;
    }
    ++out.rejected;
    dt = ladder(dt * factor);
  }
}

Vector integrate_adaptive(MidpointStepper& stepper, Vector x, double t0, double t_final,
                          double& dt, const AdaptiveOptions& opt,
                          const std::function<void(double, const Vector&, double)>& observer) {
  if (!(t_final > t0)) throw InvalidArgument("integrate_adaptive: t_final must exceed t0");
  const double floor = 1e-15 * std::abs(t_final);
  double t = t0;
  while (t < t_final) {
    double remaining = t_final - t;
    // Land on t_final without leaving a sliver step behind.
    double trial = dt >= remaining * (1.0 - 1e-12) ? remaining : dt;
    AdaptiveOptions o = opt;
    if (trial == remaining) o.max_dt = opt.max_dt > 0.0 ? std::min(opt.max_dt, remaining) : remaining;
    AdaptiveStep s = crank_nicolson_adaptive(stepper, x, trial, o, floor);
    x = std::move(s.x);
    t = s.dt_used == remaining ? t_final : t + s.dt_used;
    // A step clipped to land on t_final says nothing about the next one.
    if (trial != remaining || s.dt_used < trial) dt = s.dt_next;
    if (observer) observer(t, x, s.dt_used);
  }
  return x;
}

int staggered_drive(double t0, double t_final, double dt, const StaggeredCallbacks& cb) {
  if (!(dt > 0.0) || !(t_final >= t0)) throw InvalidArgument("staggered_drive: bad time window");
  const int steps = static_cast<int>(std::ceil((t_final - t0) / dt - 1e-9));
  for (int k = 0; k < steps; ++k) {
    double t = t0 + k * dt;
    double h = std::min(dt, t_final - t);
    if (cb.first) cb.first(k, t, h);
    if (cb.second) cb.second(k, t, h);
    if (cb.after_pair) cb.after_pair(k, k + 1 == steps ? t_final : t + h);
  }
  return steps;
}

}  // namespace phfem
