#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "phfem/errors.hpp"

namespace phfem {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

/// Immutable compressed-row matrix.
///
/// Column indices are sorted and unique within each row. Explicit zeros that
/// come out of assembly are kept so that operators assembled on the same
/// element connectivity share one sparsity pattern; several solvers rely on
/// that to reuse symbolic factorizations.
class SparseMatrix {
 public:
  using Storage = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

  SparseMatrix() = default;
  SparseMatrix(Index rows, Index cols);
  explicit SparseMatrix(Storage s);

  static SparseMatrix identity(Index n);
  static SparseMatrix diagonal(const Vector& d);
  static SparseMatrix from_dense(const DenseMatrix& a, double drop = 0.0);
  /// Same pattern as `pattern`, new values (size must equal nnz).
  static SparseMatrix with_values(const SparseMatrix& pattern, std::vector<double> values);

  Index rows() const { return m_.rows(); }
  Index cols() const { return m_.cols(); }
  Index nnz() const { return m_.nonZeros(); }
  bool empty() const { return rows() == 0 || cols() == 0; }

  std::span<const int> row_offsets() const;
  std::span<const int> col_indices() const;
  std::span<const double> values() const;

  double coeff(Index i, Index j) const { return m_.coeff(i, j); }
  double max_abs() const;
  bool same_pattern(const SparseMatrix& other) const;

  SparseMatrix transpose() const;
  DenseMatrix to_dense() const;
  const Storage& eigen() const { return m_; }

 private:
  Storage m_;
};

Vector spmv(const SparseMatrix& a, const Vector& x);
Vector operator*(const SparseMatrix& a, const Vector& x);

SparseMatrix operator+(const SparseMatrix& a, const SparseMatrix& b);
SparseMatrix operator-(const SparseMatrix& a, const SparseMatrix& b);
SparseMatrix operator*(double s, const SparseMatrix& a);
SparseMatrix product(const SparseMatrix& a, const SparseMatrix& b);
/// a*alpha + b*beta; when patterns coincide the result keeps that pattern.
SparseMatrix axpby(double alpha, const SparseMatrix& a, double beta, const SparseMatrix& b);

/// Restriction A(rows, cols) to an index subset, in the given order.
SparseMatrix submatrix(const SparseMatrix& a, std::span<const Index> rows,
                       std::span<const Index> cols);

/// Assembly buffer. Duplicate (i,j) contributions are summed at build().
class TripletBuilder {
 public:
  TripletBuilder(Index rows, Index cols) : rows_(rows), cols_(cols) {}
  void reserve(std::size_t n) { t_.reserve(n); }
  void add(Index i, Index j, double v);
  /// Adds s*A with A placed at offset (r0, c0).
  void add_block(Index r0, Index c0, const SparseMatrix& a, double s = 1.0);
  SparseMatrix build() const;

 private:
  Index rows_, cols_;
  std::vector<Eigen::Triplet<double, int>> t_;
};

/// Block matrix assembled row by row without a sort.
class BlockBuilder {
 public:
  BlockBuilder(std::vector<Index> row_sizes, std::vector<Index> col_sizes);
  void set(std::size_t bi, std::size_t bj, const SparseMatrix& a, double s = 1.0);
  SparseMatrix build() const;

 private:
  struct Entry {
    SparseMatrix m;
    double s = 0.0;
    bool set = false;
  };
  std::vector<Index> rsz_, csz_;
  std::vector<std::vector<Entry>> blocks_;  // row-major nb_r x nb_c
};

}  // namespace phfem
