#pragma once

#include <functional>
#include <map>

#include "phfem/factorization.hpp"
#include "phfem/sparse.hpp"

namespace phfem {

/// Linear (possibly constrained) one-step problem
///
///   Mass x' = Op x + f(t) + G lambda,   C x = g(t),
///
/// advanced by the implicit midpoint rule with the constraint rows imposed at
/// the end of the step. G and C may be empty (no constraints). Mass may be
/// singular as long as the pencil is not.
struct StepProblem {
  SparseMatrix mass, op;
  SparseMatrix G, C;
  /// Seminorm weight used for adaptive error control. Empty means `mass`.
  SparseMatrix error_weight;

  Index size() const { return mass.rows(); }
  Index constraints() const { return C.rows(); }
};

struct StepResult {
  Vector x;
  Vector multipliers;  // lambda, scaled by dt (the pencil solves for dt*lambda)
};

/// Implicit midpoint stepper. The pencil [Mass - dt/2 Op, G; C, 0] is factored
/// once per (dt, operator) pair and refactored on change; pencils for up to
/// four step sizes are cached so step doubling does not thrash.
class MidpointStepper {
 public:
  explicit MidpointStepper(StepProblem p);

  const StepProblem& problem() const { return p_; }

  /// Replaces the operator (modulation refresh). Cached pencils are dropped.
  void set_operator(SparseMatrix op);

  /// x_{k+1} from x_k. `forcing_mid` (size n, or empty) is f at the midpoint;
  /// `constraint_rhs` (size m, or empty for zero) is g at the step end.
  StepResult step(const Vector& x, double dt, const Vector& forcing_mid = {},
                  const Vector& constraint_rhs = {});

 private:
  const Factorization& pencil(double dt);

  StepProblem p_;
  std::map<double, Factorization> cache_;
  std::map<double, unsigned long> used_;
  unsigned long clock_ = 0;
};

/// Free-function form of one midpoint step (factors the pencil every call).
StepResult implicit_midpoint(const StepProblem& p, const Vector& x, double dt,
                             const Vector& forcing_mid = {}, const Vector& constraint_rhs = {});

struct AdaptiveOptions {
  double tol = 1e-8;        // relative local error
  double max_dt = 0.0;      // 0 means unbounded
  double min_factor = 0.5;
  double max_factor = 2.0;
};

struct AdaptiveStep {
  Vector x;
  double dt_used = 0.0;
  double error = 0.0;
  double dt_next = 0.0;
  int rejected = 0;
};

/// One accepted Crank-Nicolson step with step-doubling error control.
///
/// The full step is compared with two half steps in the error-weight
/// seminorm, relative to the state norm. On rejection dt shrinks and the
/// step is retried. Returns the full-step solution, so tol = infinity with
/// max_dt = dt reproduces the fixed-step scheme exactly. Homogeneous
/// problems only (no forcing), constraints held at zero. Proposed steps are
/// rounded down to powers of 2^(1/8) so factored pencils can be reused.
AdaptiveStep crank_nicolson_adaptive(MidpointStepper& stepper, const Vector& x, double dt,
                                     const AdaptiveOptions& opt, double dt_floor);

/// Drives crank_nicolson_adaptive from t0 to t_final, landing exactly on
/// t_final. `dt` holds the initial step on entry and the proposed next step
/// on exit. `observer(t, x, dt)` is called after every accepted step.
/// Throws ConvergenceError when dt drops below 1e-15 * t_final.
Vector integrate_adaptive(MidpointStepper& stepper, Vector x, double t0, double t_final,
                          double& dt, const AdaptiveOptions& opt,
                          const std::function<void(double, const Vector&, double)>& observer);

/// Staggered two-field driver: one call of `first` then `second` per step,
/// `after_pair(k)` once both are done. Step count is ceil(T/dt) with the
/// last step landing on T.
struct StaggeredCallbacks {
  std::function<void(int k, double t, double dt)> first;
  std::function<void(int k, double t, double dt)> second;
  std::function<void(int k, double t_next)> after_pair;
};
int staggered_drive(double t0, double t_final, double dt, const StaggeredCallbacks& cb);

}  // namespace phfem
