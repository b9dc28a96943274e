#include <doctest.h>

#include <cmath>
#include <random>

#include "phfem/basis.hpp"
#include "phfem/diagnostics.hpp"
#include "phfem/fem2d.hpp"

using namespace phfem;

TEST_SUITE("fem2d") {

TEST_CASE("uniform 2x2 mesh") {
  Mesh2D m = build_mesh(Rect{0.0, 1.0, 0.0, 1.0}, 2, 2, 1.0);
  CHECK(m.vertex_count() == 9);
  CHECK(m.hx(0) == doctest::Approx(0.5));
  CHECK(m.max_aspect_ratio() == doctest::Approx(1.0));
}

TEST_CASE("graded first cell matches the geometric sum") {
  const double g = 1.2;
  auto x = graded_gridlines(-1.0, 1.0, 16, g);
  // Half the interval holds 8 cells w0 g^k.
  double w0 = 1.0 * (g - 1.0) / (std::pow(g, 8) - 1.0);
  CHECK(x[1] - x[0] == doctest::Approx(w0).epsilon(1e-12));
  CHECK(x[8] == 0.0);
  for (std::size_t k = 0; k < x.size(); ++k) CHECK(x[k] == doctest::Approx(-x[16 - k]));
  CHECK_THROWS_AS(graded_gridlines(0.0, 1.0, 4, 0.9), InvalidArgument);
}

TEST_CASE("aspect ratio limit is enforced") {
  CHECK_THROWS_AS(Mesh2D({0.0, 1.0, 2.0}, {0.0, 0.01, 0.02}), InvalidArgument);
}

TEST_CASE("shape functions form partitions of unity") {
  for (double t : {0.0, 0.17, 0.5, 0.93}) {
    double sh = basis::hermite(0, 0, t, 0.3) + basis::hermite(2, 0, t, 0.3);
    CHECK(sh == doctest::Approx(1.0));
    double sl = 0.0, dl = 0.0;
    for (int k = 0; k < 4; ++k) {
      sl += basis::lagrange3(k, 0, t, 0.3);
      dl += basis::lagrange3(k, 1, t, 0.3);
    }
    CHECK(sl == doctest::Approx(1.0));
    CHECK(dl == doctest::Approx(0.0).epsilon(1e-12));
  }
  // Hermite slope function has unit physical derivative at 0.
  CHECK(basis::hermite(1, 1, 0.0, 0.3) == doctest::Approx(1.0));
}

TEST_CASE("dof counts") {
  Spaces2D sp(build_mesh(Rect{}, 4, 3, 1.0));
  CHECK(sp.n_psi() == 4 * 20);
  CHECK(sp.n_omega() == 13 * 10);
  CHECK(sp.n_trace() == 2 * (4 + 3));
  CHECK(sp.perimeter() == doctest::Approx(8.0));
}

TEST_CASE("static forms integrate polynomials exactly") {
  Spaces2D sp(build_mesh(Rect{}, 5, 4, 1.1));
  Forms2D f = assemble_static(sp);
  Vector one_w = interpolate_omega(sp, [](double, double) { return 1.0; });
  CHECK(one_w.dot(f.M * one_w) == doctest::Approx(4.0));
  CHECK((f.R2 * one_w).norm() < 1e-12);

  // psi = x^2 + y^2: |grad|^2 integrates to 32/3, (lap)^2 to 16*4.
  Vector q = interpolate_psi(
      sp, [](double x, double y) { return x * x + y * y; }, [](double x, double) { return 2 * x; },
      [](double, double y) { return 2 * y; }, [](double, double) { return 0.0; });
  CHECK(q.dot(f.K * q) == doctest::Approx(32.0 / 3.0));
  CHECK(q.dot(f.R1 * q) == doctest::Approx(64.0));

  Vector one_p = interpolate_psi(
      sp, [](double, double) { return 1.0; }, [](double, double) { return 0.0; },
      [](double, double) { return 0.0; }, [](double, double) { return 0.0; });
  Vector one_t = Vector::Ones(sp.n_trace());
  CHECK(one_p.dot(f.B1 * one_t) == doctest::Approx(8.0));
  CHECK(one_w.dot(f.B5 * one_t) == doctest::Approx(8.0));
  CHECK(one_t.dot(f.M_bd * one_t) == doctest::Approx(8.0));
  // Outward normal derivative of x^2 + y^2 is 2 on every side: total 16.
  CHECK(q.dot(f.B3 * one_t) == doctest::Approx(16.0));
}

TEST_CASE("modulated assemblies are skew before symmetrization") {
  Spaces2D sp(build_mesh(Rect{}, 4, 4, 1.2));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  Vector w = Vector::NullaryExpr(sp.n_omega(), [&] { return g(rng); });
  Vector p = Vector::NullaryExpr(sp.n_psi(), [&] { return g(rng); });
  SparseMatrix d1 = assemble_D1_raw(sp, w), d2 = assemble_D2_raw(sp, p);
  CHECK((d1 + d1.transpose()).max_abs() <= 1e-12 * d1.max_abs());
  CHECK((d2 + d2.transpose()).max_abs() <= 1e-12 * d2.max_abs());

  ModulatedAssembler ma(sp);
  CHECK((ma.D1(w) - assemble_D1(sp, w)).max_abs() <= 1e-14 * d1.max_abs());
  CHECK((ma.D2(p) - assemble_D2(sp, p)).max_abs() <= 1e-14 * d2.max_abs());
  CHECK(ma.D1(w).same_pattern(ma.psi_pattern()));
}

TEST_CASE("Poisson solve converges at fourth order") {
  auto exact = [](double x, double y) { return std::sin(M_PI * x) * std::sin(M_PI * y); };
  std::vector<double> h, err;
  for (Index n : {4, 8, 16}) {
    Spaces2D sp(build_mesh(Rect{}, n, n, 1.0));
    Forms2D f = assemble_static(sp);
    Vector w = interpolate_omega(sp, [&](double x, double y) { return 2 * M_PI * M_PI * exact(x, y); });
    Vector psi = solve_poisson_dirichlet(sp, f, w);
    double e = 0.0;
    for (double x = -0.95; x < 1.0; x += 0.1)
      for (double y = -0.95; y < 1.0; y += 0.1)
        e = std::max(e, std::abs(evaluate_psi(sp, psi, x, y) - exact(x, y)));
    h.push_back(2.0 / static_cast<double>(n));
    err.push_back(e);
  }
  CHECK(err.back() < 1e-4);
  CHECK(diag::convergence_order(h, err) >= 3.5);
}

TEST_CASE("point evaluation reproduces interpolated polynomials") {
  Spaces2D sp(build_mesh(Rect{}, 3, 5, 1.3));
  auto f = [](double x, double y) { return x * x * x - 2 * x * y * y + y; };
  Vector w = interpolate_omega(sp, f);
  CHECK(evaluate_omega(sp, w, 0.31, -0.77) == doctest::Approx(f(0.31, -0.77)));
  Vector p = interpolate_psi(
      sp, f, [](double x, double y) { return 3 * x * x - 2 * y * y; },
      [](double x, double y) { return -4 * x * y + 1; }, [](double, double y) { return -4 * y; });
  CHECK(evaluate_psi(sp, p, -0.2, 0.45) == doctest::Approx(f(-0.2, 0.45)));
}

}
