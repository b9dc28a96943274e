#pragma once

#include <array>
#include <functional>
#include <vector>

#include "phfem/sparse.hpp"

namespace phfem {

struct Rect {
  double x0 = -1.0, x1 = 1.0, y0 = -1.0, y1 = 1.0;
  bool operator==(const Rect&) const = default;
};

/// Tensor-product rectangle mesh. Gridlines are mirror symmetric about the
/// midpoint and widths grow geometrically from each wall to the centre.
class Mesh2D {
 public:
  Mesh2D(std::vector<double> xlines, std::vector<double> ylines, double max_aspect = 50.0);

  Index nx() const { return static_cast<Index>(xs_.size()) - 1; }
  Index ny() const { return static_cast<Index>(ys_.size()) - 1; }
  const std::vector<double>& xlines() const { return xs_; }
  const std::vector<double>& ylines() const { return ys_; }
  double hx(Index i) const { return xs_[i + 1] - xs_[i]; }
  double hy(Index j) const { return ys_[j + 1] - ys_[j]; }
  Index vertex_count() const { return (nx() + 1) * (ny() + 1); }
  Index cell_count() const { return nx() * ny(); }
  Rect bounds() const { return {xs_.front(), xs_.back(), ys_.front(), ys_.back()}; }
  double max_aspect_ratio() const;

 private:
  std::vector<double> xs_, ys_;
};

/// n cells on [a,b]; width of the k-th cell is w0 * g^min(k, n-1-k).
std::vector<double> graded_gridlines(double a, double b, Index n, double grading);
Mesh2D build_mesh(const Rect& r, Index nx, Index ny, double grading);

/// Dof maps for the three discrete spaces on one mesh.
///
/// psi: Bogner-Fox-Schmit bicubic Hermite, dofs (value, d/dx, d/dy, d2/dxdy)
///      per vertex.
/// omega: Q3 Lagrange on the (3nx+1) x (3ny+1) node lattice.
/// trace: P1 on the boundary loop, one dof per boundary vertex, numbered
///        counter-clockwise from (x0, y0).
class Spaces2D {
 public:
  enum PsiDof { kValue = 0, kDx = 1, kDy = 2, kDxy = 3 };
  enum Side { kBottom = 0, kRight = 1, kTop = 2, kLeft = 3 };

  struct TraceNode {
    Index i, j;  // mesh vertex
    double s;    // arc length from (x0, y0)
  };
  struct BoundaryEdge {
    Index ci, cj;  // owning cell
    Side side;
    Index ta, tb;  // trace dofs at the edge ends, in loop order
    double length;
  };

  explicit Spaces2D(Mesh2D mesh);

  const Mesh2D& mesh() const { return mesh_; }
  Index n_psi() const { return 4 * mesh_.vertex_count(); }
  Index n_omega() const { return (3 * mesh_.nx() + 1) * (3 * mesh_.ny() + 1); }
  Index n_trace() const { return static_cast<Index>(trace_.size()); }
  Index omega_nx() const { return 3 * mesh_.nx() + 1; }
  Index omega_ny() const { return 3 * mesh_.ny() + 1; }

  Index vertex(Index i, Index j) const { return j * (mesh_.nx() + 1) + i; }
  Index psi_dof(Index i, Index j, int type) const { return 4 * vertex(i, j) + type; }
  Index omega_dof(Index I, Index J) const { return J * omega_nx() + I; }
  double omega_x(Index I) const;
  double omega_y(Index J) const;

  /// Local ordering 4*corner + type, corners (0,0), (1,0), (0,1), (1,1).
  std::array<Index, 16> psi_cell_dofs(Index ci, Index cj) const;
  /// Local ordering 4*q + p for lattice offset (p, q).
  std::array<Index, 16> omega_cell_dofs(Index ci, Index cj) const;

  const std::vector<TraceNode>& trace_nodes() const { return trace_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return edges_; }
  double perimeter() const { return perimeter_; }

  /// psi dofs fixed by homogeneous Dirichlet data: boundary values and
  /// tangential derivatives (both first derivatives at corners).
  std::vector<Index> psi_dirichlet_dofs() const;
  std::vector<Index> omega_boundary_dofs() const;

 private:
  Mesh2D mesh_;
  std::vector<TraceNode> trace_;
  std::vector<BoundaryEdge> edges_;
  double perimeter_ = 0.0;
};

/// Shape function values on one cell at reference point (tx, ty).
struct PsiShape {
  std::array<double, 16> v, dx, dy, dxx, dyy;
};
struct OmegaShape {
  std::array<double, 16> v, dx, dy;
};
void eval_psi_shape(double hx, double hy, double tx, double ty, PsiShape& out);
void eval_omega_shape(double hx, double hy, double tx, double ty, OmegaShape& out);

/// State-independent matrices.
///   M      (N_w x N_w)  int phi2_i phi2_j
///   K      (N_p x N_p)  int grad phi1_i . grad phi1_j
///   R1     (N_p x N_p)  int lap phi1_i lap phi1_j
///   R2     (N_w x N_w)  int grad phi2_i . grad phi2_j
///   M_bd   (M x M)      int_bd nu_i nu_j
///   B1     (N_p x M)    int_bd phi1_i nu_j
///   B3     (N_p x M)    int_bd (n . grad phi1_i) nu_j
///   B5     (N_w x M)    int_bd phi2_i nu_j
///   M_mix  (N_p x N_w)  int phi1_i phi2_j
///   M_psi  (N_p x N_p)  int phi1_i phi1_j
struct Forms2D {
  SparseMatrix M, K, R1, R2, M_bd, B1, B3, B5, M_mix, M_psi;
};

Forms2D assemble_static(const Spaces2D& sp);

/// Raw (unsymmetrized) modulated assemblies, exposed for tests.
SparseMatrix assemble_D1_raw(const Spaces2D& sp, const Vector& omega);
SparseMatrix assemble_D2_raw(const Spaces2D& sp, const Vector& psi);

/// D1(w)_ij = int w grad phi1_i . perp phi1_j, skew part only.
SparseMatrix assemble_D1(const Spaces2D& sp, const Vector& omega);
/// D2(p)_ij = int p perp phi2_i . grad phi2_j, skew part only.
SparseMatrix assemble_D2(const Spaces2D& sp, const Vector& psi);

/// B2(w)_ij = int_bd phi1_i w nu_j and B4(p)_ij = int_bd phi2_i p nu_j.
struct BoundaryModulated {
  SparseMatrix B2, B4;
};
BoundaryModulated assemble_B2_B4(const Spaces2D& sp, const Vector& omega, const Vector& psi);

/// Fast repeated assembly of D1 / D2 on fixed patterns (the pattern of K and
/// of M respectively). Per-cell scatter positions are precomputed.
class ModulatedAssembler {
 public:
  explicit ModulatedAssembler(const Spaces2D& sp);
  SparseMatrix D1(const Vector& omega) const;
  SparseMatrix D2(const Vector& psi) const;
  const SparseMatrix& psi_pattern() const { return psi_pattern_; }
  const SparseMatrix& omega_pattern() const { return omega_pattern_; }

 private:
  Spaces2D sp_;
  SparseMatrix psi_pattern_, omega_pattern_;
  std::vector<int> psi_scatter_, omega_scatter_;    // 256 per cell
  std::vector<int> psi_transpose_, omega_transpose_;  // position of (j,i)
};

/// Interpolation and point evaluation.
using ScalarField2D = std::function<double(double, double)>;
Vector interpolate_omega(const Spaces2D& sp, const ScalarField2D& f);
/// BFS interpolant from value and derivatives (f, fx, fy, fxy).
Vector interpolate_psi(const Spaces2D& sp, const ScalarField2D& f, const ScalarField2D& fx,
                       const ScalarField2D& fy, const ScalarField2D& fxy);

double evaluate_psi(const Spaces2D& sp, const Vector& psi, double x, double y);
double evaluate_omega(const Spaces2D& sp, const Vector& omega, double x, double y);

/// K psi = M_mix omega with psi = 0 and tangential psi derivatives = 0 on
/// the boundary (strong elimination).
Vector solve_poisson_dirichlet(const Spaces2D& sp, const Forms2D& forms, const Vector& omega);

}  // namespace phfem
