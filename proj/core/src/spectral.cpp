#include "phfem/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "phfem/factorization.hpp"

namespace phfem {

namespace {

Vector random_unit(Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector x(n);
  for (Index i = 0; i < n; ++i) x[i] = u(rng);
  return x.normalized();
}

// Largest eigenvalue of a symmetric positive operator by Lanczos with a
// fully orthogonal basis. The top Ritz value grows monotonically towards
// lambda_max; iteration stops once it has not moved by more than rel_tol
// over ten steps, or the basis spans an invariant subspace.
double lanczos_max(const LinearOperator& op, Index n, const ConditionOptions& opt,
                   std::mt19937_64& rng, const char* which) {
  const Index kmax = std::min<Index>(n, opt.max_iterations);
  DenseMatrix q(n, kmax);
  Vector alpha(kmax), beta(kmax);
  std::vector<double> history;
  q.col(0) = random_unit(n, rng);
  for (Index k = 0; k < kmax; ++k) {
    Vector w = op(q.col(k));
    alpha[k] = q.col(k).dot(w);
    for (int pass = 0; pass < 2; ++pass) w -= q.leftCols(k + 1) * (q.leftCols(k + 1).transpose() * w);
    beta[k] = w.norm();

    const Index m = k + 1;
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es;
    es.computeFromTridiagonal(alpha.head(m), beta.head(m - 1), Eigen::EigenvaluesOnly);
    const double theta = es.eigenvalues()[m - 1];
    if (!(theta > 0.0) || es.eigenvalues()[0] < -1e-12 * theta)
      throw InvalidArgument(std::string("condition_number_estimate: ") + which +
                            " is not positive definite");
    history.push_back(theta);
    const bool stalled = m > 10 && theta - history[history.size() - 11] <= opt.rel_tol * theta;
    if (m == n || stalled || beta[k] <= 1e-14 * theta) return theta;
    if (k + 1 < kmax) q.col(k + 1) = w / beta[k];
  }
  throw ConvergenceError(std::string("Lanczos on ") + which + " did not converge in " +
                         std::to_string(kmax) + " iterations");
}

// Orthonormalizes the columns of y in the M inner product, two passes of
// modified Gram-Schmidt. Collapsed columns are replaced by random vectors.
void m_orthonormalize(DenseMatrix& y, const SparseMatrix& mass, std::mt19937_64& rng) {
  const Index p = y.cols();
  for (Index j = 0; j < p; ++j) {
    for (int pass = 0; pass < 3; ++pass) {
      Vector v = y.col(j);
      double before = std::sqrt(std::abs(v.dot(mass * v)));
      for (int sweep = 0; sweep < 2; ++sweep)
        for (Index i = 0; i < j; ++i) {
          Vector mi = mass * Vector(y.col(i));
          v -= mi.dot(v) * y.col(i);
        }
      double nv = std::sqrt(std::abs(v.dot(mass * v)));
      if (nv > 1e-10 * before && nv > 0.0) {
        y.col(j) = v / nv;
        break;
      }
      y.col(j) = random_unit(y.rows(), rng);
    }
  }
}

}  // namespace

double condition_number_estimate(const SparseMatrix& a, const ConditionOptions& opt) {
  if (a.rows() != a.cols()) throw DimensionError("condition_number_estimate: not square");
  if (a.rows() <= opt.dense_limit) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(a.to_dense(), Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()[0], hi = es.eigenvalues()[a.rows() - 1];
    if (!(lo > 0.0))
      throw InvalidArgument("condition_number_estimate: matrix is not positive definite");
    return hi / lo;
  }
  std::mt19937_64 rng(opt.seed);
  LinearOperator apply = [&](const Vector& x) { return spmv(a, x); };
  double lmax = lanczos_max(apply, a.rows(), opt, rng, "A");
  Factorization f(a, true);
  LinearOperator inv = [&](const Vector& x) { return f.solve(x); };
  double inv_lmin = lanczos_max(inv, a.rows(), opt, rng, "A^-1");
  return lmax * inv_lmin;
}

std::vector<EigenPair> generalized_eigs_smallest(const LinearOperator& apply_inv,
                                                 const SparseMatrix& mass, Index k,
                                                 const EigsOptions& opt) {
  const Index n = mass.rows();
  if (k < 1 || k > n)
    throw DimensionError("generalized_eigs_smallest: k=" + std::to_string(k) +
                         " outside [1, " + std::to_string(n) + "]");
  const Index p = std::min(n, std::max<Index>(2 * k, k + 8));
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseMatrix y(n, p);
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < n; ++i) y(i, j) = u(rng);

  // Everything is done on T = A^-1 M, which is well conditioned at the bottom
  // of the spectrum; projecting A itself would add roundoff of order
  // eps * lambda_max to the smallest Ritz values.
  for (int it = 0; it < opt.max_iterations; ++it) {
    m_orthonormalize(y, mass, rng);
    DenseMatrix my(n, p), z(n, p);
    for (Index j = 0; j < p; ++j) {
      my.col(j) = mass * Vector(y.col(j));
      z.col(j) = apply_inv(Vector(my.col(j)));
    }
    DenseMatrix h = my.transpose() * z;
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h);
    std::vector<Index> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
      return std::abs(es.eigenvalues()[a]) > std::abs(es.eigenvalues()[b]);
    });
    DenseMatrix v(p, p);
    Vector mu(p);
    for (Index j = 0; j < p; ++j) {
      v.col(j) = es.eigenvectors().col(order[j]);
      mu[j] = es.eigenvalues()[order[j]];
    }
    DenseMatrix x = y * v;
    y = z * v;  // T x, the next block

    bool done = true;
    for (Index j = 0; j < k && done; ++j) {
      if (mu[j] == 0.0) throw ConvergenceError("generalized_eigs_smallest: zero Ritz value");
      Vector r = Vector(y.col(j)) - mu[j] * Vector(x.col(j));
      if (std::sqrt(std::abs(r.dot(mass * r))) > opt.residual_tol * std::abs(mu[j])) done = false;
    }
    if (done) {
      std::vector<EigenPair> out;
      for (Index j = 0; j < k; ++j) out.push_back({1.0 / mu[j], Vector(x.col(j))});
      return out;
    }
  }
  throw ConvergenceError("generalized_eigs_smallest: no convergence after " +
                         std::to_string(opt.max_iterations) + " iterations");
}

std::vector<EigenPair> generalized_eigs_smallest(const SparseMatrix& a, const SparseMatrix& mass,
                                                 Index k, const EigsOptions& opt) {
  if (a.rows() != a.cols() || mass.rows() != mass.cols() || a.rows() != mass.rows())
    throw DimensionError("generalized_eigs_smallest: incompatible pencil");
  Factorization f(a, false);
  LinearOperator inv = [&](const Vector& x) { return f.solve(x); };
  return generalized_eigs_smallest(inv, mass, k, opt);
}

}  // namespace phfem
