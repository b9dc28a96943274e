#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "phfem/diagnostics.hpp"
#include "phfem/fem1d.hpp"

using namespace phfem;
namespace fs = std::filesystem;

TEST_SUITE("diagnostics") {

TEST_CASE("constant trace has no drift") {
  auto s = diag::balance_summary({0.0, 1.0, 2.0}, {5.0, 5.0, 5.0});
  CHECK(s.samples == 3);
  CHECK(s.scale == 5.0);
  CHECK(s.max_drift == 0.0);
  CHECK(s.final_drift == 0.0);
  CHECK(s.drift_slope == 0.0);
  CHECK(s.max_residual == 0.0);
}

TEST_CASE("linear drift") {
  std::vector<double> t, h, r;
  for (int i = 0; i <= 10; ++i) {
    t.push_back(0.1 * i);
    h.push_back(4.0 - 0.2 * t.back());
    r.push_back(i % 2 ? 1e-3 : 0.0);
  }
  auto s = diag::balance_summary(t, h, r);
  CHECK(s.drift_slope == doctest::Approx(-0.05));
  CHECK(s.final_drift == doctest::Approx(-0.05));
  CHECK(s.max_drift == doctest::Approx(0.05));
  CHECK(s.max_residual == doctest::Approx(1e-3 / 4.0));
  CHECK(s.mean_residual == doctest::Approx(5e-3 / 11.0 / 4.0));
  // Small energies are measured in absolute terms.
  CHECK(diag::balance_summary({0.0, 1.0}, {0.0, 1e-3}).max_drift == doctest::Approx(1e-3));
}

TEST_CASE("malformed traces throw") {
  CHECK_THROWS_AS(diag::balance_summary({0.0}, {1.0}), InvalidArgument);
  CHECK_THROWS_AS(diag::balance_summary({0.0, 1.0}, {1.0}), InvalidArgument);
  CHECK_THROWS_AS(diag::balance_summary({1.0, 0.0}, {1.0, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(diag::balance_summary({0.0, 1.0}, {1.0, NAN}), InvalidArgument);
  CHECK_THROWS_AS(diag::balance_summary({0.0, 1.0}, {1.0, 1.0}, {0.0}), InvalidArgument);
}

TEST_CASE("summary from a CSV table") {
  CsvTable tab;
  tab.header = {"t", "H", "res"};
  tab.rows = {{0.0, 2.0, 0.0}, {1.0, 2.0, 1e-14}, {2.0, 2.0, 0.0}};
  auto s = diag::balance_summary(tab, "t", "H", "res");
  CHECK(s.t1 == 2.0);
  CHECK(s.max_residual == doctest::Approx(5e-15));
  CHECK_THROWS_AS(diag::balance_summary(tab, "t", "missing"), InvalidArgument);
  std::ostringstream os;
  diag::write_report(os, "rod", s);
  CHECK(os.str().find("max_drift") != std::string::npos);
}

TEST_CASE("convergence orders") {
  std::vector<double> h{0.1, 0.05, 0.025, 0.0125}, e2, e4;
  for (double x : h) {
    e2.push_back(3.0 * x * x);
    e4.push_back(0.5 * std::pow(x, 4));
  }
  CHECK(diag::convergence_order(h, e2) == doctest::Approx(2.0));
  CHECK(diag::convergence_order(h, e4) == doctest::Approx(4.0));
  CHECK_THROWS_AS(diag::convergence_order({0.1, 0.05}, {1.0, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(diag::convergence_order({0.1, 0.05, 0.0}, {1.0, 0.5, 0.1}), InvalidArgument);
  CHECK_THROWS_AS(diag::convergence_order({0.1, 0.05, 0.02}, {1.0, -0.5, 0.1}), InvalidArgument);
}

TEST_CASE("condition sweep matches dense eigenvalues") {
  const std::vector<double> ells{0.0, 0.02};
  auto table = diag::condition_sweep(ells, {30});
  REQUIRE(table.size() == 2);
  Mesh1D mesh = Mesh1D::uniform(0.0, 1.0, 30);
  Forms1D f = assemble_forms(mesh, [](double) { return 1.0; });
  DenseMatrix bbt = f.B.to_dense() * f.B.to_dense().transpose();
  for (std::size_t i = 0; i < ells.size(); ++i) {
    const double l = ells[i];
    DenseMatrix a = f.M.to_dense() + l * l * f.K.to_dense() + l * bbt;
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(a);
    double ref = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
    CHECK(table[i].N == 30);
    CHECK(table[i].ell == l);
    CHECK(table[i].kappa == doctest::Approx(ref).epsilon(1e-9));
  }
  fs::path p = fs::temp_directory_path() / "phfem_condition_test.csv";
  diag::write_condition_csv(p.string(), table);
  CsvTable back = read_csv(p.string());
  CHECK(back.header == std::vector<std::string>{"N", "ell", "kappa"});
  CHECK(back.rows[1][2] == table[1].kappa);
  fs::remove(p);
}

}
