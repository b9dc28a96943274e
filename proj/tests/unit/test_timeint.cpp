#include <doctest.h>

#include <cmath>

#include "phfem/timeint.hpp"

using namespace phfem;

namespace {

StepProblem oscillator(double w) {
  DenseMatrix a = DenseMatrix::Zero(2, 2);
  a(0, 1) = w;
  a(1, 0) = -w;
  return {SparseMatrix::identity(2), SparseMatrix::from_dense(a), {}, {}, {}};
}

Vector exact_oscillator(double w, double t) {
  Vector x(2);
  x << std::cos(w * t), -std::sin(w * t);
  return x;
}

}  // namespace

TEST_SUITE("timeint") {

TEST_CASE("midpoint conserves the quadratic invariant") {
  MidpointStepper st(oscillator(3.0));
  Vector x = exact_oscillator(3.0, 0.0);
  for (int k = 0; k < 1000; ++k) x = st.step(x, 0.05).x;
  CHECK(std::abs(x.squaredNorm() - 1.0) < 1e-13);
}

TEST_CASE("midpoint is the Cayley transform") {
  StepProblem p = oscillator(2.0);
  Vector x0 = exact_oscillator(2.0, 0.0);
  const double dt = 0.1;
  DenseMatrix a = p.op.to_dense(), id = DenseMatrix::Identity(2, 2);
  Vector ref = (id - 0.5 * dt * a).lu().solve((id + 0.5 * dt * a) * x0);
  CHECK((implicit_midpoint(p, x0, dt).x - ref).norm() < 1e-15);
  // Second order: halving dt cuts the error by about four.
  auto err = [&](double h) {
    MidpointStepper st(p);
    Vector x = x0;
    for (int k = 0; k < static_cast<int>(std::lround(1.0 / h)); ++k) x = st.step(x, h).x;
    return (x - exact_oscillator(2.0, 1.0)).norm();
  };
  CHECK(err(0.01) / err(0.005) == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("forcing enters at the midpoint") {
  // x' = 1 integrates exactly.
  StepProblem p{SparseMatrix::identity(1), SparseMatrix(1, 1), {}, {}, {}};
  Vector f = Vector::Ones(1);
  Vector x = implicit_midpoint(p, Vector::Zero(1), 0.25, f).x;
  CHECK(x[0] == doctest::Approx(0.25));
}

TEST_CASE("constraint rows hold at the step end") {
  DenseMatrix a = DenseMatrix::Zero(3, 3);
  a(0, 1) = 1.0;
  a(1, 0) = -1.0;
  a(1, 2) = 0.5;
  a(2, 1) = -0.5;
  DenseMatrix c = DenseMatrix::Zero(1, 3);
  c(0, 2) = 1.0;
  StepProblem p{SparseMatrix::identity(3), SparseMatrix::from_dense(a),
                SparseMatrix::from_dense(c.transpose()), SparseMatrix::from_dense(c), {}};
  MidpointStepper st(p);
  Vector x = Vector::Ones(3);
  for (double g : {0.3, -0.1, 0.7}) {
    StepResult r = st.step(x, 0.1, {}, Vector::Constant(1, g));
    CHECK(r.x[2] == doctest::Approx(g).epsilon(1e-14));
    CHECK(r.multipliers.size() == 1);
    x = r.x;
  }
  CHECK_THROWS_AS(st.step(x, -1.0), InvalidArgument);
  CHECK_THROWS_AS(st.step(Vector::Ones(2), 0.1), DimensionError);
}

TEST_CASE("operator refresh changes the dynamics") {
  MidpointStepper st(oscillator(1.0));
  Vector x0 = exact_oscillator(1.0, 0.0);
  Vector a = st.step(x0, 0.1).x;
  st.set_operator(oscillator(2.0).op);
  Vector b = st.step(x0, 0.1).x;
  CHECK((b - implicit_midpoint(oscillator(2.0), x0, 0.1).x).norm() < 1e-15);
  CHECK((a - b).norm() > 1e-3);
}

TEST_CASE("adaptive integration meets the tolerance and lands on t_final") {
  MidpointStepper st(oscillator(5.0));
  double dt = 1e-3, t_last = 0.0;
  AdaptiveOptions opt;
  opt.tol = 1e-7;
  int steps = 0;
  Vector x = integrate_adaptive(st, exact_oscillator(5.0, 0.0), 0.0, 2.0, dt, opt,
                                [&](double t, const Vector&, double h) {
                                  CHECK(t > t_last);
                                  t_last = t;
                                  ++steps;
                                  // After the caller's first step every step sits on
                                  // the 2^(1/8) ladder unless clipped.
                                  double j = 8.0 * std::log2(h);
                                  if (steps > 1 && t != 2.0) CHECK(std::abs(j - std::round(j)) < 1e-9);
                                });
  CHECK(t_last == 2.0);
  CHECK(steps > 10);
  CHECK((x - exact_oscillator(5.0, 2.0)).norm() < 1e-3);
  CHECK(std::abs(x.squaredNorm() - 1.0) < 1e-12);
}

TEST_CASE("infinite tolerance reproduces fixed steps") {
  MidpointStepper st(oscillator(1.0));
  AdaptiveOptions opt;
  opt.tol = INFINITY;
  opt.max_dt = 0.125;
  AdaptiveStep s = crank_nicolson_adaptive(st, exact_oscillator(1.0, 0.0), 0.125, opt, 1e-12);
  CHECK(s.dt_used == 0.125);
  CHECK((s.x - implicit_midpoint(oscillator(1.0), exact_oscillator(1.0, 0.0), 0.125).x).norm() <
        1e-15);
}

TEST_CASE("staggered driver counts and ordering") {
  std::vector<int> order;
  double last = -1.0;
  StaggeredCallbacks cb;
  cb.first = [&](int, double, double) { order.push_back(1); };
  cb.second = [&](int, double, double) { order.push_back(2); };
  cb.after_pair = [&](int, double t) { last = t; };
  int n = staggered_drive(0.0, 0.35, 0.1, cb);
  CHECK(n == 4);
  CHECK(last == 0.35);
  CHECK(order == std::vector<int>{1, 2, 1, 2, 1, 2, 1, 2});
  CHECK(staggered_drive(0.0, 0.5, 0.1, {}) == 5);
}

}
