#include <doctest.h>

#include <filesystem>

#include "../common/random_bundle.hpp"
#include "phfem/bundle_io.hpp"
#include "phfem/factorization.hpp"
#include "phfem/structures.hpp"

using namespace phfem;

namespace {

// Mass-spring-damper: P = diag(m, 1/k), J = [[0,-1],[1,0]], one damper port.
PHSystemBundle oscillator(double m, double k, double c) {
  PHSystemBundle b;
  b.n = 2;
  b.r = 1;
  b.n_D = 1;
  Vector p(2);
  p << m, 1.0 / k;
  b.P = SparseMatrix::diagonal(p);
  b.S = SparseMatrix::identity(2);
  DenseMatrix j = DenseMatrix::Zero(4, 4);
  j(0, 1) = -1.0;
  j(1, 0) = 1.0;
  j(0, 2) = -1.0;
  j(2, 0) = 1.0;
  j(0, 3) = 1.0;
  j(3, 0) = -1.0;
  b.J = SparseMatrix::from_dense(j);
  b.R = SparseMatrix::diagonal(Vector::Constant(1, c));
  b.B_D = SparseMatrix::from_dense(DenseMatrix::Identity(2, 1));
  return b;
}

}  // namespace

TEST_SUITE("structures") {

TEST_CASE("oscillator bundle passes every check") {
  StructureReport r = verify_structure(oscillator(2.0, 3.0, 0.5));
  CHECK(r.passed());
  CHECK(r.skew_violation == 0.0);
  CHECK(r.min_rayleigh_R == doctest::Approx(0.5));
}

TEST_CASE("each violated property is reported") {
  PHSystemBundle b = oscillator(1.0, 1.0, 1.0);
  DenseMatrix j = b.J.to_dense();
  j(0, 1) = -2.0;
  b.J = SparseMatrix::from_dense(j);
  CHECK_FALSE(verify_structure(b).skew_ok);

  b = oscillator(1.0, 1.0, -1.0);
  CHECK_FALSE(verify_structure(b).resistive_ok);

  b = oscillator(1.0, 1.0, 1.0);
  DenseMatrix p = b.P.to_dense();
  p(0, 1) = 0.3;
  b.P = SparseMatrix::from_dense(p);
  CHECK_FALSE(verify_structure(b).symmetry_ok);

  b = oscillator(1.0, 1.0, 1.0);
  b.P = SparseMatrix(2, 2);
  b.S = SparseMatrix::diagonal(Vector::Unit(2, 0));
  CHECK_FALSE(verify_structure(b).rank_ok);
}

TEST_CASE("dimension labels are checked") {
  PHSystemBundle b = oscillator(1.0, 1.0, 1.0);
  b.n_D = 2;
  CHECK_THROWS_AS(verify_structure(b), DimensionError);
}

TEST_CASE("random Lagrange bundles pass and recover their latent state") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 3 + trial % 10, n_L = trial % 3;
    PHSystemBundle b = testing::random_lagrange_bundle(rng, n, n_L, trial % 2 == 1);
    CHECK(verify_structure(b).passed());

    Vector z = Vector::LinSpaced(n + n_L, -1.0, 2.0);
    Vector pz = b.P * z;
    Vector e = Factorization(b.weight(), false).solve(b.S * z);
    LatentPair lp = recover_latent(b, pz.head(n), pz.tail(n_L), e.head(n), e.tail(n_L), 1e-12);
    Vector zz(n + n_L);
    zz << lp.lambda, lp.u_tilde;
    CHECK((zz - z).norm() <= 1e-10 * z.norm());
    CHECK(hamiltonian(b, lp) == doctest::Approx(0.5 * pz.dot(e)).epsilon(1e-10));
  }
}

TEST_CASE("inconsistent port data is rejected") {
  std::mt19937_64 rng(3);
  PHSystemBundle b = testing::random_lagrange_bundle(rng, 6, 0, false);
  Vector alpha = Vector::Ones(6), e = Vector::Zero(6);
  e[0] = 1.0;
  CHECK_THROWS_AS(recover_latent(b, alpha, Vector(), e, Vector()), ConsistencyError);
}

TEST_CASE("power balance closes for the damped oscillator") {
  // Explicit midpoint solution for z' = (J - R) Q z with Q = P^-1 on a
  // 2-dof system; midpoint preserves the discrete balance exactly.
  const double m = 2.0, k = 3.0, c = 0.4, dt = 0.01;
  PHSystemBundle b = oscillator(m, k, c);
  DenseMatrix a(2, 2);
  a << -c / m, -k, 1.0 / m, 0.0;  // states (p, q) with efforts (p/m, k q)
  DenseMatrix id = DenseMatrix::Identity(2, 2);
  Vector x0(2), x1;
  x0 << 1.0, 0.2;
  x1 = (id - 0.5 * dt * a).lu().solve((id + 0.5 * dt * a) * x0);
  // Latent z = P^-1 x, i.e. the efforts.
  LatentPair z0{Vector((Vector(2) << x0[0] / m, k * x0[1]).finished()), Vector()};
  LatentPair z1{Vector((Vector(2) << x1[0] / m, k * x1[1]).finished()), Vector()};
  PortSnapshot p0, p1;
  p0.f_R = Vector::Constant(1, z0.lambda[0]);
  p1.f_R = Vector::Constant(1, z1.lambda[0]);
  p1.time = dt;
  double res = power_balance_residual(b, z0, z1, p0, p1);
  CHECK(res <= 1e-12);
}

TEST_CASE("bundle files round trip") {
  std::mt19937_64 rng(9);
  PHSystemBundle b = testing::random_lagrange_bundle(rng, 5, 2, true);
  b.B_L = SparseMatrix::from_dense(DenseMatrix::Identity(5, 2));
  auto dir = std::filesystem::temp_directory_path() / "phfem_bundle_rt";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  write_bundle(dir.string(), b);
  PHSystemBundle c = read_bundle(dir.string());
  CHECK(c.n == b.n);
  CHECK(c.n_L == b.n_L);
  CHECK((c.P - b.P).max_abs() == 0.0);
  CHECK((c.S - b.S).max_abs() == 0.0);
  CHECK((c.J - b.J).max_abs() == 0.0);
  CHECK((c.M_weight - b.M_weight).max_abs() == 0.0);
  CHECK((c.B_L - b.B_L).max_abs() == 0.0);
  std::filesystem::remove_all(dir);
}

}
