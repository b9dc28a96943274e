#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "phfem/sparse.hpp"

namespace phfem {

struct EigenPair {
  double value;
  Vector vector;
};

struct ConditionOptions {
  /// Up to this size the spectrum is computed densely, which is exact.
  Index dense_limit = 3000;
  /// Lanczos beyond it: stop once the extreme Ritz value moves by less than
  /// rel_tol over ten iterations. Operators with a continuous spectrum edge
  /// converge only algebraically, so this is an estimate.
  double rel_tol = 1e-10;
  int max_iterations = 2000;
  std::uint64_t seed = 12345;
};

/// lambda_max / lambda_min of an SPD matrix. Large matrices use Lanczos on
/// A and on A^-1 (one sparse factorization).
double condition_number_estimate(const SparseMatrix& a, const ConditionOptions& opt = {});

struct EigsOptions {
  double residual_tol = 1e-8;
  int max_iterations = 500;
  std::uint64_t seed = 2024;
};

/// k smallest-magnitude eigenpairs of A x = lambda M x, A symmetric, M SPD.
/// Block inverse iteration with Rayleigh-Ritz on M-orthonormal bases.
/// Converged when ||T x - mu x||_M <= residual_tol |mu| for T = A^-1 M.
std::vector<EigenPair> generalized_eigs_smallest(const SparseMatrix& a, const SparseMatrix& mass,
                                                 Index k, const EigsOptions& opt = {});

/// Operator form for pencils whose A is only available implicitly;
/// `apply_inv` solves A y = x.
using LinearOperator = std::function<Vector(const Vector&)>;
std::vector<EigenPair> generalized_eigs_smallest(const LinearOperator& apply_inv,
                                                 const SparseMatrix& mass, Index k,
                                                 const EigsOptions& opt = {});

}  // namespace phfem
