#include <doctest.h>

#include <cmath>

#include "phfem/diagnostics.hpp"
#include "phfem/nanorod.hpp"

using namespace phfem;

namespace {

nanorod::Config base(double ell, Index nodes = 100) {
  nanorod::Config c;
  c.ell = ell;
  c.nodes = nodes;
  return c;
}

}  // namespace

TEST_SUITE("nanorod") {

TEST_CASE("local rod conserves the Robin Hamiltonian") {
  nanorod::Model m(base(0.0));
  auto r = nanorod::run(m);
  CHECK(r.series.size() == 101);
  CHECK(r.series.back().t == 10.0);
  CHECK(r.max_relative_drift <= 1e-10);
  // Without ell the boundary-stored terms vanish.
  CHECK(r.series.back().e.E_port_v == 0.0);
  CHECK(r.series.back().e.E_port_sigma == 0.0);
}

TEST_CASE("nonlocal rods conserve energy up to round-off") {
  for (double ell : {0.01, 0.05}) {
    nanorod::Model m(base(ell));
    auto r = nanorod::run(m);
    CHECK(r.max_relative_drift <= 1e-10);
    const auto& e = r.series.back().e;
    CHECK(e.H_bulk + e.E_port_v + e.E_port_sigma == doctest::Approx(e.H_rob));
  }
}

TEST_CASE("zero initial data stays zero") {
  nanorod::Config c = base(0.02, 20);
  c.v0 = [](double) { return 0.0; };
  nanorod::Model m(c);
  auto r = nanorod::run(m);
  CHECK(r.final_state.v.norm() == 0.0);
  CHECK(r.final_state.sigma.norm() == 0.0);
  CHECK(r.max_relative_drift == 0.0);
}

TEST_CASE("both bundles satisfy the structure checks") {
  for (double ell : {0.0, 0.03}) {
    nanorod::Model m(base(ell, 30));
    CHECK(verify_structure(nanorod::build_system(m)).passed());
    PHSystemBundle free = nanorod::build_system_free(m);
    CHECK(free.n_L == 2);
    CHECK(free.n_D == 2);
    CHECK(verify_structure(free).passed());
  }
}

TEST_CASE("port observations") {
  nanorod::Model m(base(0.02, 21));
  nanorod::State s = nanorod::initial_state(m);
  s.sigma = Vector::LinSpaced(21, 1.0, 3.0);
  Vector yd = nanorod::observe_y_D(m, s);
  CHECK(yd[0] == doctest::Approx(-s.v[0]));
  CHECK(yd[1] == doctest::Approx(-s.v[20]));
  Vector yl = nanorod::observe_y_L(m, s);
  CHECK(yl[1] == doctest::Approx(-0.02 * 0.02 * 3.0));
  // The Robin energy port closes B^T sigma + l u_L = 0.
  Vector ul = nanorod::robin_u_L(m, s);
  CHECK((m.forms.B.transpose() * s.sigma + 0.02 * ul).norm() < 1e-15);
}

TEST_CASE("implicit Robin solve reproduces the exponential kernel") {
  const double ell = 0.05;
  auto strain = [](double x) { return std::sin(2.0 * M_PI * x) + x * x; };
  std::vector<double> h, err;
  for (Index n : {50, 100, 200}) {
    nanorod::Model m(base(ell, n));
    Vector eps = interpolate_p1(m.mesh, strain);
    Vector d = nanorod::implicit_kernel_apply(m, eps) - nanorod::explicit_kernel_apply(m, eps);
    h.push_back(1.0 / static_cast<double>(n - 1));
    err.push_back(l2_norm(m.mesh, m.forms, d));
  }
  CHECK(err.back() < 1e-3);
  CHECK(diag::convergence_order(h, err) >= 1.9);
  nanorod::Model m0(base(0.0, 10));
  CHECK_THROWS_AS(nanorod::explicit_kernel_apply(m0, Vector::Ones(10)), InvalidArgument);
}

TEST_CASE("invalid configurations are rejected") {
  nanorod::Config c = base(0.0);
  c.E = -1.0;
  CHECK_THROWS_AS(nanorod::Model{c}, InvalidArgument);
  c = base(-0.1);
  CHECK_THROWS_AS(nanorod::Model{c}, InvalidArgument);
  c = base(0.0, 1);
  CHECK_THROWS_AS(nanorod::Model{c}, InvalidArgument);
}

}
