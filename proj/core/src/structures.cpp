#include "phfem/structures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseQR>

#include "phfem/factorization.hpp"

namespace phfem {

namespace {

void expect(bool ok, const std::string& what) {
  if (!ok) throw DimensionError("bundle: " + what);
}

bool identical(const SparseMatrix& a, const SparseMatrix& b) {
  if (!a.same_pattern(b)) return false;
  auto va = a.values(), vb = b.values();
  return std::equal(va.begin(), va.end(), vb.begin());
}

DenseMatrix stacked_dense(const SparseMatrix& p, const SparseMatrix& s) {
  DenseMatrix a(p.rows() + s.rows(), p.cols());
  a.topRows(p.rows()) = p.to_dense();
  a.bottomRows(s.rows()) = s.to_dense();
  return a;
}

}  // namespace

void PHSystemBundle::check_dimensions() const {
  const Index nz = n + n_L;
  expect(n >= 0 && n_L >= 0 && n_D >= 0 && r >= 0, "negative dimension label");
  expect(P.rows() == nz && P.cols() == nz, "P must be (n+n_L) square");
  expect(S.rows() == nz && S.cols() == nz, "S must be (n+n_L) square");
  expect(J.rows() == n + r + n_D && J.cols() == J.rows(), "J must be (n+r+n_D) square");
  expect(r == 0 ? R.empty() || (R.rows() == 0) : (R.rows() == r && R.cols() == r),
         "R must be r x r");
  expect(M_weight.empty() || (M_weight.rows() == nz && M_weight.cols() == nz),
         "M_weight must be (n+n_L) square");
  expect(B_D.empty() || B_D.cols() == n_D, "B_D must have n_D columns");
  expect(B_L.empty() || B_L.cols() == n_L, "B_L must have n_L columns");
}

SparseMatrix PHSystemBundle::weight() const {
  return M_weight.empty() ? SparseMatrix::identity(n + n_L) : M_weight;
}

std::string StructureReport::summary() const {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific;
  os << "skew " << (skew_ok ? "ok" : "FAIL") << " (" << skew_violation << "), symmetry "
     << (symmetry_ok ? "ok" : "FAIL") << " (" << symmetry_violation << " of " << symmetry_scale
     << "), resistive " << (resistive_ok ? "ok" : "FAIL") << " (min " << min_rayleigh_R
     << "), rank " << (rank_ok ? "ok" : "FAIL") << " [" << rank_method << "]";
  return os.str();
}

StructureReport verify_structure(const PHSystemBundle& b, const StructureTolerances& tol) {
  b.check_dimensions();
  StructureReport rep;
  const Index nz = b.n + b.n_L;

  rep.skew_violation = (b.J + b.J.transpose()).max_abs();
  rep.skew_ok = rep.skew_violation <= tol.skew * b.J.max_abs();

  SparseMatrix w = b.weight();
  if (identical(b.S, w)) {
    // P^T M^-1 M = P^T: the check reduces to plain symmetry of P.
    rep.symmetry_violation = (b.P - b.P.transpose()).max_abs();
    rep.symmetry_scale = b.P.max_abs();
  } else if (nz <= tol.dense_limit) {
    Factorization fw(w, false);
    DenseMatrix sd = b.S.to_dense();
    DenseMatrix x(nz, nz);
    for (Index j = 0; j < nz; ++j) x.col(j) = fw.solve(Vector(sd.col(j)));
    DenseMatrix a = b.P.to_dense().transpose() * x;
    rep.symmetry_violation = (a - a.transpose()).cwiseAbs().maxCoeff();
    rep.symmetry_scale = a.cwiseAbs().maxCoeff();
  } else {
    // Bilinear probes: x^T A y - y^T A x for random x, y.
    Factorization fw(w, false);
    SparseMatrix pt = b.P.transpose();
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    double viol = 0.0, scale = 0.0;
    for (int k = 0; k < 8; ++k) {
      Vector x(nz), y(nz);
      for (Index i = 0; i < nz; ++i) x[i] = g(rng), y[i] = g(rng);
      Vector ay = pt * fw.solve(b.S * y);
      Vector ax = pt * fw.solve(b.S * x);
      viol = std::max(viol, std::abs(x.dot(ay) - y.dot(ax)) / (x.norm() * y.norm()));
      scale = std::max(scale, ay.cwiseAbs().maxCoeff() / y.cwiseAbs().maxCoeff());
    }
    rep.symmetry_violation = viol;
    rep.symmetry_scale = scale;
  }
  rep.symmetry_ok = rep.symmetry_violation <= tol.symmetry * rep.symmetry_scale;

  if (b.r == 0) {
    rep.resistive_ok = true;
  } else {
    double rmax = b.R.max_abs();
    rep.resistive_symmetry_violation = (b.R - b.R.transpose()).max_abs();
    double bound = -tol.resistive * rmax;
    if (b.r <= tol.dense_limit) {
      DenseMatrix rd = b.R.to_dense();
      Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (rd + rd.transpose()),
                                                    Eigen::EigenvaluesOnly);
      rep.min_rayleigh_R = es.eigenvalues().minCoeff();
    } else {
      // LDL^T of R + tau I with all pivots positive certifies lambda_min > -tau.
      using Csc = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
      double tau = tol.resistive * rmax;
      Csc shifted = Csc(b.R.eigen());
      for (Index i = 0; i < b.r; ++i) shifted.coeffRef(i, i) += tau;
      Eigen::SimplicialLDLT<Csc> ldlt(shifted);
      bool ok = ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0.0;
      rep.min_rayleigh_R = ok ? -tau : -std::numeric_limits<double>::infinity();
    }
    rep.resistive_ok = rep.resistive_symmetry_violation <= tol.resistive * rmax &&
                       rep.min_rayleigh_R >= bound;
  }

  if (nz <= tol.dense_limit) {
    Eigen::ColPivHouseholderQR<DenseMatrix> qr(stacked_dense(b.P, b.S));
    qr.setThreshold(1e-11);
    rep.rank_ok = qr.rank() == nz;
    rep.rank_method = "dense QR";
  } else {
    try {
      Factorization fs(b.S, false);
      rep.rank_ok = true;
      rep.rank_method = "S nonsingular";
    } catch (const SingularMatrixError&) {
      // Randomized residual probe: [P;S] z must not vanish for random z.
      std::mt19937_64 rng(11);
      std::normal_distribution<double> g;
      double scale = std::max(b.P.max_abs(), b.S.max_abs());
      rep.rank_ok = true;
      for (int k = 0; k < 8; ++k) {
        Vector z(nz);
        for (Index i = 0; i < nz; ++i) z[i] = g(rng);
        double img = std::hypot((b.P * z).norm(), (b.S * z).norm());
        if (img <= 1e-12 * scale * z.norm()) rep.rank_ok = false;
      }
      rep.rank_method = "randomized probe";
    }
  }
  return rep;
}

LatentPair recover_latent(const PHSystemBundle& b, const Vector& alpha, const Vector& u_L,
                          const Vector& e, const Vector& y_L, double rel_tol) {
  b.check_dimensions();
  const Index nz = b.n + b.n_L;
  if (alpha.size() != b.n || e.size() != b.n || u_L.size() != b.n_L || y_L.size() != b.n_L)
    throw DimensionError("recover_latent: port vector lengths do not match labels");

  Vector top(nz), co(nz);
  top << alpha, u_L;
  co << e, y_L;
  Vector rhs(2 * nz);
  rhs << top, b.weight() * co;

  Vector z;
  if (nz <= 2000) {
    Eigen::ColPivHouseholderQR<DenseMatrix> qr(stacked_dense(b.P, b.S));
    z = qr.solve(rhs);
  } else {
    using Csc = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
    TripletBuilder tb(2 * nz, nz);
    tb.add_block(0, 0, b.P);
    tb.add_block(nz, 0, b.S);
    Csc a(tb.build().eigen());
    Eigen::SparseQR<Csc, Eigen::COLAMDOrdering<int>> qr(a);
    if (qr.info() != Eigen::Success) throw Error("recover_latent: sparse QR failed");
    z = qr.solve(rhs);
  }
  Vector res(2 * nz);
  res << b.P * z, b.S * z;
  res -= rhs;
  double scale = std::max(rhs.norm(), 1e-300);
  if (res.norm() > rel_tol * scale)
    throw ConsistencyError("recover_latent: inputs violate the Lagrange relation (residual " +
                           std::to_string(res.norm() / scale) + ")");
  return {z.head(b.n), z.tail(b.n_L)};
}

double hamiltonian(const PHSystemBundle& b, const LatentPair& lp) {
  b.check_dimensions();
  if (lp.lambda.size() != b.n || lp.u_tilde.size() != b.n_L)
    throw DimensionError("hamiltonian: latent pair length mismatch");
  Vector z(b.n + b.n_L);
  z << lp.lambda, lp.u_tilde;
  Vector pz = b.P * z;
  Vector sz = b.S * z;
  // (Pz)^T M^-1 (Sz) is symmetric in P <-> S because M^-1 is symmetric.
  if (b.M_weight.empty()) return 0.5 * pz.dot(sz);
  Factorization fw(b.M_weight, false);
  return 0.5 * pz.dot(fw.solve(sz));
}

double power_balance_residual(const PHSystemBundle& b, const LatentPair& z0, const LatentPair& z1,
                              const PortSnapshot& p0, const PortSnapshot& p1) {
  double dt = p1.time - p0.time;
  if (!(dt > 0.0)) throw InvalidArgument("power_balance_residual: snapshots not increasing in time");
  double dh = hamiltonian(b, z1) - hamiltonian(b, z0);
  double supplied = 0.0;
  if (p0.f_R.size() > 0 && b.r > 0) {
    Vector fr = 0.5 * (p0.f_R + p1.f_R);
    supplied -= fr.dot(b.R * fr);
  }
  if (p0.u_D.size() > 0) supplied += (0.5 * (p0.y_D + p1.y_D)).dot(0.5 * (p0.u_D + p1.u_D));
  if (p0.u_L.size() > 0) supplied += (0.5 * (p0.y_L + p1.y_L)).dot((p1.u_L - p0.u_L) / dt);
  return std::abs(dh / dt - supplied);
}

}  // namespace phfem
