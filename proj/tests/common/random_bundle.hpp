#pragma once

#include <random>

#include <Eigen/QR>

#include "phfem/structures.hpp"

namespace phfem::testing {

inline DenseMatrix random_orthogonal(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  DenseMatrix a = DenseMatrix::NullaryExpr(n, n, [&] { return g(rng); });
  Eigen::HouseholderQR<DenseMatrix> qr(a);
  return qr.householderQ();
}

inline DenseMatrix random_spd(Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.5, 2.0);
  DenseMatrix q = random_orthogonal(n, rng);
  Vector d = Vector::NullaryExpr(n, [&] { return u(rng); });
  return q * d.asDiagonal() * q.transpose();
}

/// Random Lagrange structure: P = C T and S = M D T with C = Q^T cos(theta),
/// D = Q^T sin(theta), so P^T M^-1 S = T^T cos sin T is symmetric and [P; S]
/// has full column rank. A few angles sit at pi/2, which makes P singular.
/// T is kept well conditioned.
inline PHSystemBundle random_lagrange_bundle(std::mt19937_64& rng, Index n, Index n_L,
                                             bool weighted) {
  const Index nz = n + n_L;
  std::uniform_real_distribution<double> ang(0.1, 1.4), coin(0.0, 1.0), u(0.5, 1.5);
  DenseMatrix q = random_orthogonal(nz, rng);
  Vector c(nz), s(nz);
  for (Index i = 0; i < nz; ++i) {
    double th = coin(rng) < 0.15 ? 1.5707963267948966 : ang(rng);
    c[i] = std::cos(th);
    s[i] = std::sin(th);
  }
  DenseMatrix t = random_orthogonal(nz, rng) *
                  Vector::NullaryExpr(nz, [&] { return u(rng); }).asDiagonal();
  DenseMatrix m = weighted ? random_spd(nz, rng) : DenseMatrix::Identity(nz, nz);
  PHSystemBundle b;
  b.n = n;
  b.n_L = n_L;
  b.P = SparseMatrix::from_dense(q.transpose() * c.asDiagonal() * t);
  b.S = SparseMatrix::from_dense(m * q.transpose() * s.asDiagonal() * t);
  if (weighted) b.M_weight = SparseMatrix::from_dense(m);
  DenseMatrix j = DenseMatrix::NullaryExpr(n, n, [&] { return coin(rng) - 0.5; });
  b.J = SparseMatrix::from_dense(j - j.transpose());
  return b;
}

}  // namespace phfem::testing
