#include "phfem/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

namespace phfem {

namespace {

void require_dims(bool ok, const char* what) {
  if (!ok) throw DimensionError(std::string("dimension mismatch in ") + what);
}

}  // namespace

SparseMatrix::SparseMatrix(Index rows, Index cols) : m_(rows, cols) { m_.makeCompressed(); }

SparseMatrix::SparseMatrix(Storage s) : m_(std::move(s)) { m_.makeCompressed(); }

SparseMatrix SparseMatrix::identity(Index n) {
  Storage s(n, n);
  s.setIdentity();
  return SparseMatrix(std::move(s));
}

SparseMatrix SparseMatrix::diagonal(const Vector& d) {
  TripletBuilder tb(d.size(), d.size());
  for (Index i = 0; i < d.size(); ++i) tb.add(i, i, d[i]);
  return tb.build();
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& a, double drop) {
  TripletBuilder tb(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      if (std::abs(a(i, j)) > drop) tb.add(i, j, a(i, j));
  return tb.build();
}

SparseMatrix SparseMatrix::with_values(const SparseMatrix& pattern, std::vector<double> values) {
  require_dims(static_cast<Index>(values.size()) == pattern.nnz(), "with_values");
  Storage s = pattern.m_;
  std::copy(values.begin(), values.end(), s.valuePtr());
  return SparseMatrix(std::move(s));
}

std::span<const int> SparseMatrix::row_offsets() const {
  return {m_.outerIndexPtr(), static_cast<std::size_t>(m_.rows() + 1)};
}

std::span<const int> SparseMatrix::col_indices() const {
  return {m_.innerIndexPtr(), static_cast<std::size_t>(m_.nonZeros())};
}

std::span<const double> SparseMatrix::values() const {
  return {m_.valuePtr(), static_cast<std::size_t>(m_.nonZeros())};
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values()) m = std::max(m, std::abs(v));
  return m;
}

bool SparseMatrix::same_pattern(const SparseMatrix& o) const {
  if (rows() != o.rows() || cols() != o.cols() || nnz() != o.nnz()) return false;
  auto ro = row_offsets(), oo = o.row_offsets();
  auto ci = col_indices(), oc = o.col_indices();
  return std::memcmp(ro.data(), oo.data(), ro.size_bytes()) == 0 &&
         std::memcmp(ci.data(), oc.data(), ci.size_bytes()) == 0;
}

SparseMatrix SparseMatrix::transpose() const {
  Storage t = m_.transpose();
  return SparseMatrix(std::move(t));
}

DenseMatrix SparseMatrix::to_dense() const { return DenseMatrix(m_); }

Vector spmv(const SparseMatrix& a, const Vector& x) {
  require_dims(a.cols() == x.size(), "spmv");
  Vector y(a.rows());
  auto ro = a.row_offsets();
  auto ci = a.col_indices();
  auto va = a.values();
  for (Index i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (int p = ro[i]; p < ro[i + 1]; ++p) s += va[p] * x[ci[p]];
    y[i] = s;
  }
  return y;
}

Vector operator*(const SparseMatrix& a, const Vector& x) { return spmv(a, x); }

SparseMatrix axpby(double alpha, const SparseMatrix& a, double beta, const SparseMatrix& b) {
  require_dims(a.rows() == b.rows() && a.cols() == b.cols(), "axpby");
  if (a.same_pattern(b)) {
    std::vector<double> v(a.nnz());
    auto va = a.values(), vb = b.values();
    for (std::size_t p = 0; p < v.size(); ++p) v[p] = alpha * va[p] + beta * vb[p];
    return SparseMatrix::with_values(a, std::move(v));
  }
  SparseMatrix::Storage s = alpha * a.eigen() + beta * b.eigen();
  return SparseMatrix(std::move(s));
}

SparseMatrix operator+(const SparseMatrix& a, const SparseMatrix& b) { return axpby(1.0, a, 1.0, b); }
SparseMatrix operator-(const SparseMatrix& a, const SparseMatrix& b) { return axpby(1.0, a, -1.0, b); }

SparseMatrix operator*(double s, const SparseMatrix& a) {
  std::vector<double> v(a.values().begin(), a.values().end());
  for (double& x : v) x *= s;
  return SparseMatrix::with_values(a, std::move(v));
}

SparseMatrix product(const SparseMatrix& a, const SparseMatrix& b) {
  require_dims(a.cols() == b.rows(), "product");
  SparseMatrix::Storage s = (a.eigen() * b.eigen()).pruned(0.0);
  return SparseMatrix(std::move(s));
}

SparseMatrix submatrix(const SparseMatrix& a, std::span<const Index> rows,
                       std::span<const Index> cols) {
  std::vector<Index> cmap(a.cols(), -1);
  for (std::size_t k = 0; k < cols.size(); ++k) {
    require_dims(cols[k] >= 0 && cols[k] < a.cols(), "submatrix");
    cmap[cols[k]] = static_cast<Index>(k);
  }
  TripletBuilder tb(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  auto ro = a.row_offsets();
  auto ci = a.col_indices();
  auto va = a.values();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    Index i = rows[k];
    require_dims(i >= 0 && i < a.rows(), "submatrix");
    for (int p = ro[i]; p < ro[i + 1]; ++p)
      if (cmap[ci[p]] >= 0) tb.add(static_cast<Index>(k), cmap[ci[p]], va[p]);
  }
  return tb.build();
}

void TripletBuilder::add(Index i, Index j, double v) {
  if (i < 0 || i >= rows_ || j < 0 || j >= cols_)
    throw DimensionError("triplet (" + std::to_string(i) + "," + std::to_string(j) +
                         ") outside " + std::to_string(rows_) + "x" + std::to_string(cols_));
  t_.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
}

void TripletBuilder::add_block(Index r0, Index c0, const SparseMatrix& a, double s) {
  auto ro = a.row_offsets();
  auto ci = a.col_indices();
  auto va = a.values();
  for (Index i = 0; i < a.rows(); ++i)
    for (int p = ro[i]; p < ro[i + 1]; ++p) add(r0 + i, c0 + ci[p], s * va[p]);
}

SparseMatrix TripletBuilder::build() const {
  // setFromTriplets sums duplicates; insertion order is fixed by the caller,
  // so the summation order (and the result) is reproducible.
  SparseMatrix::Storage s(rows_, cols_);
  s.setFromTriplets(t_.begin(), t_.end());
  return SparseMatrix(std::move(s));
}

BlockBuilder::BlockBuilder(std::vector<Index> row_sizes, std::vector<Index> col_sizes)
    : rsz_(std::move(row_sizes)), csz_(std::move(col_sizes)),
      blocks_(rsz_.size(), std::vector<Entry>(csz_.size())) {}

void BlockBuilder::set(std::size_t bi, std::size_t bj, const SparseMatrix& a, double s) {
  require_dims(bi < rsz_.size() && bj < csz_.size(), "BlockBuilder::set");
  require_dims(a.rows() == rsz_[bi] && a.cols() == csz_[bj], "BlockBuilder::set");
  blocks_[bi][bj] = Entry{a, s, true};
}

SparseMatrix BlockBuilder::build() const {
  Index nr = 0, nc = 0;
  std::vector<Index> coff(csz_.size() + 1, 0);
  for (Index r : rsz_) nr += r;
  for (std::size_t j = 0; j < csz_.size(); ++j) coff[j + 1] = coff[j] + csz_[j];
  nc = coff.back();

  Index nnz = 0;
  for (const auto& row : blocks_)
    for (const auto& e : row)
      if (e.set) nnz += e.m.nnz();

  SparseMatrix::Storage s(nr, nc);
  s.resizeNonZeros(nnz);
  int* outer = s.outerIndexPtr();
  int* inner = s.innerIndexPtr();
  double* val = s.valuePtr();
  Index pos = 0, grow = 0;
  outer[0] = 0;
  for (std::size_t bi = 0; bi < rsz_.size(); ++bi) {
    for (Index i = 0; i < rsz_[bi]; ++i) {
      for (std::size_t bj = 0; bj < csz_.size(); ++bj) {
        const Entry& e = blocks_[bi][bj];
        if (!e.set) continue;
        auto ro = e.m.row_offsets();
        auto ci = e.m.col_indices();
        auto va = e.m.values();
        for (int p = ro[i]; p < ro[i + 1]; ++p) {
          inner[pos] = static_cast<int>(coff[bj] + ci[p]);
          val[pos] = e.s * va[p];
          ++pos;
        }
      }
      outer[++grow] = static_cast<int>(pos);
    }
  }
  return SparseMatrix(std::move(s));
}

}  // namespace phfem
