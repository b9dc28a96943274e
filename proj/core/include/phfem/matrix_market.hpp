#pragma once

#include <iosfwd>
#include <string>

#include "phfem/sparse.hpp"

namespace phfem {

enum class MatrixMarketSymmetry { General, Symmetric };

/// Coordinate real Matrix Market, 1-based indices, 17 significant digits.
/// Symmetric output stores the lower triangle only; the caller is
/// responsible for passing a symmetric matrix.
void write_matrix_market(std::ostream& os, const SparseMatrix& a,
                         MatrixMarketSymmetry sym = MatrixMarketSymmetry::General);
void write_matrix_market(const std::string& path, const SparseMatrix& a,
                         MatrixMarketSymmetry sym = MatrixMarketSymmetry::General);

SparseMatrix read_matrix_market(std::istream& is);
SparseMatrix read_matrix_market(const std::string& path);

}  // namespace phfem
