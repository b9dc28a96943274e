#pragma once

#include <functional>
#include <vector>

#include "phfem/sparse.hpp"

namespace phfem {

/// Interval mesh a = x_1 < ... < x_N = b carrying P1 Lagrange dofs.
class Mesh1D {
 public:
  explicit Mesh1D(std::vector<double> nodes);
  static Mesh1D uniform(double a, double b, Index n_nodes);

  Index size() const { return static_cast<Index>(x_.size()); }
  Index elements() const { return size() - 1; }
  double a() const { return x_.front(); }
  double b() const { return x_.back(); }
  double node(Index i) const { return x_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& nodes() const { return x_; }

 private:
  std::vector<double> x_;
};

/// P1 matrices: M, M_rho (N x N), K, D (N x N), B (N x 2), M_bd (2 x 2).
struct Forms1D {
  SparseMatrix M, M_rho, K, D, B, M_bd;
};

using ScalarField1D = std::function<double(double)>;

Forms1D assemble_forms(const Mesh1D& mesh, const ScalarField1D& rho);
Vector interpolate_p1(const Mesh1D& mesh, const ScalarField1D& f);
double l2_norm(const Mesh1D& mesh, const Forms1D& forms, const Vector& u);

/// Value at x of the P1 interpolant with nodal values u.
double evaluate_p1(const Mesh1D& mesh, const Vector& u, double x);

}  // namespace phfem
