#pragma once

#include <memory>

#include "phfem/sparse.hpp"

namespace phfem {

inline constexpr double kDefaultPivotTolerance = 1e-13;

/// Direct factorization of a square sparse matrix.
///
/// General matrices go through sparse LU with partial pivoting (UMFPACK),
/// symmetric ones through a simplicial LDL^T. Construction throws
/// SingularMatrixError when a pivot falls below `pivot_tol` relative to the
/// largest one, so a live handle is always usable. Single consumer: do not
/// solve concurrently on one handle.
class Factorization {
 public:
  Factorization();
  Factorization(const SparseMatrix& a, bool symmetric, double pivot_tol = kDefaultPivotTolerance);
  ~Factorization();
  Factorization(Factorization&&) noexcept;
  Factorization& operator=(Factorization&&) noexcept;
  Factorization(const Factorization&) = delete;
  Factorization& operator=(const Factorization&) = delete;

  bool valid() const;
  bool symmetric() const { return symmetric_; }
  double pivot_tolerance() const { return tol_; }
  Index size() const { return n_; }

  Vector solve(const Vector& b) const;

  /// New numeric factorization. When the pattern equals the previous one the
  /// symbolic analysis is reused.
  void refactor(const SparseMatrix& a);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  bool symmetric_ = false;
  double tol_ = kDefaultPivotTolerance;
  Index n_ = 0;
};

Factorization factorize(const SparseMatrix& a, bool symmetric,
                        double pivot_tol = kDefaultPivotTolerance);
Vector solve(const Factorization& f, const Vector& b);

}  // namespace phfem
