#include "phfem/fem2d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "phfem/basis.hpp"
#include "phfem/factorization.hpp"

namespace phfem {

namespace {

using basis::gauss5;
using basis::hermite;
using basis::lagrange3;

struct Frame {
  Index i0, i1;  // lattice offset
};

// Cell containing coordinate x among gridlines, and the local coordinate.
std::pair<Index, double> locate(const std::vector<double>& lines, double x) {
  Index n = static_cast<Index>(lines.size()) - 1;
  auto it = std::upper_bound(lines.begin(), lines.end(), x);
  Index c = std::clamp<Index>(static_cast<Index>(it - lines.begin()) - 1, 0, n - 1);
  return {c, (x - lines[c]) / (lines[c + 1] - lines[c])};
}

// Outward normal per side.
constexpr double kNormal[4][2] = {{0.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}};

// Reference coordinates of the edge point at parameter u (from ta to tb).
std::pair<double, double> edge_point(Spaces2D::Side side, double u) {
  switch (side) {
    case Spaces2D::kBottom: return {u, 0.0};
    case Spaces2D::kRight: return {1.0, u};
    case Spaces2D::kTop: return {1.0 - u, 1.0};
    default: return {0.0, 1.0 - u};
  }
}

// Position of column j in CSR row i.
int find_entry(const SparseMatrix& a, Index i, Index j) {
  auto ro = a.row_offsets();
  auto ci = a.col_indices();
  auto first = ci.begin() + ro[i], last = ci.begin() + ro[i + 1];
  auto it = std::lower_bound(first, last, static_cast<int>(j));
  if (it == last || *it != j) throw Error("pattern lookup failed");
  return static_cast<int>(it - ci.begin());
}

SparseMatrix skew_part(const SparseMatrix& raw) {
  return 0.5 * (raw - raw.transpose());
}

template <typename Local>
SparseMatrix assemble_cells(const Spaces2D& sp, bool psi_space, Local&& local) {
  const Mesh2D& m = sp.mesh();
  const Index n = psi_space ? sp.n_psi() : sp.n_omega();
  TripletBuilder tb(n, n);
  tb.reserve(static_cast<std::size_t>(m.cell_count()) * 256);
  double a[16][16];
  for (Index cj = 0; cj < m.ny(); ++cj)
    for (Index ci = 0; ci < m.nx(); ++ci) {
      auto dofs = psi_space ? sp.psi_cell_dofs(ci, cj) : sp.omega_cell_dofs(ci, cj);
      for (auto& row : a) std::fill(std::begin(row), std::end(row), 0.0);
      local(ci, cj, a);
      for (int r = 0; r < 16; ++r)
        for (int c = 0; c < 16; ++c) tb.add(dofs[r], dofs[c], a[r][c]);
    }
  return tb.build();
}

}  // namespace

Mesh2D::Mesh2D(std::vector<double> xlines, std::vector<double> ylines, double max_aspect)
    : xs_(std::move(xlines)), ys_(std::move(ylines)) {
  if (xs_.size() < 2 || ys_.size() < 2) throw InvalidArgument("Mesh2D needs at least one cell");
  for (const auto* l : {&xs_, &ys_})
    for (std::size_t k = 1; k < l->size(); ++k)
      if (!((*l)[k] > (*l)[k - 1]))
        throw InvalidArgument("Mesh2D: degenerate cell, gridlines not strictly increasing");
  double ar = max_aspect_ratio();
  if (ar > max_aspect)
    throw InvalidArgument("Mesh2D: degenerate cell, aspect ratio " + std::to_string(ar) +
                          " exceeds " + std::to_string(max_aspect));
}

double Mesh2D::max_aspect_ratio() const {
  auto minmax = [](const std::vector<double>& l) {
    double lo = 1e300, hi = 0.0;
    for (std::size_t k = 1; k < l.size(); ++k) {
      lo = std::min(lo, l[k] - l[k - 1]);
      hi = std::max(hi, l[k] - l[k - 1]);
    }
    return std::pair{lo, hi};
  };
  auto [xlo, xhi] = minmax(xs_);
  auto [ylo, yhi] = minmax(ys_);
  return std::max(xhi / ylo, yhi / xlo);
}

std::vector<double> graded_gridlines(double a, double b, Index n, double grading) {
  if (n < 1 || !(b > a)) throw InvalidArgument("graded_gridlines: bad interval or cell count");
  if (!(grading >= 1.0)) throw InvalidArgument("graded_gridlines: grading must be >= 1");
  std::vector<double> w(static_cast<std::size_t>(n));
  double total = 0.0;
  for (Index k = 0; k < n; ++k) {
    w[k] = std::pow(grading, static_cast<double>(std::min(k, n - 1 - k)));
    total += w[k];
  }
  std::vector<double> x(static_cast<std::size_t>(n + 1));
  x[0] = a;
  for (Index k = 0; k < n; ++k) x[k + 1] = x[k] + (b - a) * w[k] / total;
  for (Index k = 0; k <= n / 2; ++k) x[n - k] = a + b - x[k];
  if (n % 2 == 0) x[n / 2] = 0.5 * (a + b);
  return x;
}

Mesh2D build_mesh(const Rect& r, Index nx, Index ny, double grading) {
  if (nx < 2 || ny < 2) throw InvalidArgument("build_mesh: nx and ny must be >= 2");
  return Mesh2D(graded_gridlines(r.x0, r.x1, nx, grading),
                graded_gridlines(r.y0, r.y1, ny, grading));
}

Spaces2D::Spaces2D(Mesh2D mesh) : mesh_(std::move(mesh)) {
  const Index nx = mesh_.nx(), ny = mesh_.ny();
  const auto& xs = mesh_.xlines();
  const auto& ys = mesh_.ylines();
  double s = 0.0;
  auto push = [&](Index i, Index j) { trace_.push_back({i, j, s}); };
  for (Index i = 0; i < nx; ++i) {
    push(i, 0);
    s += mesh_.hx(i);
  }
  for (Index j = 0; j < ny; ++j) {
    push(nx, j);
    s += mesh_.hy(j);
  }
  for (Index i = nx; i > 0; --i) {
    push(i, ny);
    s += mesh_.hx(i - 1);
  }
  for (Index j = ny; j > 0; --j) {
    push(0, j);
    s += mesh_.hy(j - 1);
  }
  perimeter_ = s;
  (void)xs;
  (void)ys;

  const Index m = n_trace();
  Index k = 0;
  for (Index i = 0; i < nx; ++i, ++k) edges_.push_back({i, 0, kBottom, k, (k + 1) % m, mesh_.hx(i)});
  for (Index j = 0; j < ny; ++j, ++k)
    edges_.push_back({nx - 1, j, kRight, k, (k + 1) % m, mesh_.hy(j)});
  for (Index i = nx; i > 0; --i, ++k)
    edges_.push_back({i - 1, ny - 1, kTop, k, (k + 1) % m, mesh_.hx(i - 1)});
  for (Index j = ny; j > 0; --j, ++k)
    edges_.push_back({0, j - 1, kLeft, k, (k + 1) % m, mesh_.hy(j - 1)});
}

double Spaces2D::omega_x(Index I) const {
  Index c = std::min(I / 3, mesh_.nx() - 1);
  return mesh_.xlines()[c] + static_cast<double>(I - 3 * c) * mesh_.hx(c) / 3.0;
}

double Spaces2D::omega_y(Index J) const {
  Index c = std::min(J / 3, mesh_.ny() - 1);
  return mesh_.ylines()[c] + static_cast<double>(J - 3 * c) * mesh_.hy(c) / 3.0;
}

std::array<Index, 16> Spaces2D::psi_cell_dofs(Index ci, Index cj) const {
  std::array<Index, 16> d{};
  for (int c = 0; c < 4; ++c)
    for (int t = 0; t < 4; ++t) d[4 * c + t] = psi_dof(ci + (c & 1), cj + (c >> 1), t);
  return d;
}

std::array<Index, 16> Spaces2D::omega_cell_dofs(Index ci, Index cj) const {
  std::array<Index, 16> d{};
  for (int q = 0; q < 4; ++q)
    for (int p = 0; p < 4; ++p) d[4 * q + p] = omega_dof(3 * ci + p, 3 * cj + q);
  return d;
}

std::vector<Index> Spaces2D::psi_dirichlet_dofs() const {
  std::vector<Index> out;
  const Index nx = mesh_.nx(), ny = mesh_.ny();
  for (Index j = 0; j <= ny; ++j)
    for (Index i = 0; i <= nx; ++i) {
      bool vert = i == 0 || i == nx;
      bool horiz = j == 0 || j == ny;
      if (!vert && !horiz) continue;
      out.push_back(psi_dof(i, j, kValue));
      if (horiz) out.push_back(psi_dof(i, j, kDx));
      if (vert) out.push_back(psi_dof(i, j, kDy));
    }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Index> Spaces2D::omega_boundary_dofs() const {
  std::vector<Index> out;
  for (Index J = 0; J < omega_ny(); ++J)
    for (Index I = 0; I < omega_nx(); ++I)
      if (I == 0 || J == 0 || I == omega_nx() - 1 || J == omega_ny() - 1)
        out.push_back(omega_dof(I, J));
  return out;
}

void eval_psi_shape(double hx, double hy, double tx, double ty, PsiShape& out) {
  double hxv[4][3], hyv[4][3];
  for (int k = 0; k < 4; ++k)
    for (int d = 0; d < 3; ++d) {
      hxv[k][d] = hermite(k, d, tx, hx);
      hyv[k][d] = hermite(k, d, ty, hy);
    }
  for (int c = 0; c < 4; ++c)
    for (int t = 0; t < 4; ++t) {
      const int kx = 2 * (c & 1) + (t & 1);
      const int ky = 2 * (c >> 1) + ((t >> 1) & 1);
      const int l = 4 * c + t;
      out.v[l] = hxv[kx][0] * hyv[ky][0];
      out.dx[l] = hxv[kx][1] * hyv[ky][0];
      out.dy[l] = hxv[kx][0] * hyv[ky][1];
      out.dxx[l] = hxv[kx][2] * hyv[ky][0];
      out.dyy[l] = hxv[kx][0] * hyv[ky][2];
    }
}

void eval_omega_shape(double hx, double hy, double tx, double ty, OmegaShape& out) {
  double lx[4][2], ly[4][2];
  for (int k = 0; k < 4; ++k)
    for (int d = 0; d < 2; ++d) {
      lx[k][d] = lagrange3(k, d, tx, hx);
      ly[k][d] = lagrange3(k, d, ty, hy);
    }
  for (int q = 0; q < 4; ++q)
    for (int p = 0; p < 4; ++p) {
      const int l = 4 * q + p;
      out.v[l] = lx[p][0] * ly[q][0];
      out.dx[l] = lx[p][1] * ly[q][0];
      out.dy[l] = lx[p][0] * ly[q][1];
    }
}

Forms2D assemble_static(const Spaces2D& sp) {
  const Mesh2D& m = sp.mesh();
  const auto& g = gauss5();
  Forms2D f;

  f.K = assemble_cells(sp, true, [&](Index ci, Index cj, double (&a)[16][16]) {
    const double hx = m.hx(ci), hy = m.hy(cj), jac = hx * hy;
    PsiShape s;
    for (int qx = 0; qx < 5; ++qx)
      for (int qy = 0; qy < 5; ++qy) {
        eval_psi_shape(hx, hy, g.x[qx], g.x[qy], s);
        const double w = g.w[qx] * g.w[qy] * jac;
        for (int i = 0; i < 16; ++i)
          for (int j = 0; j < 16; ++j) a[i][j] += w * (s.dx[i] * s.dx[j] + s.dy[i] * s.dy[j]);
      }
  });
  f.R1 = assemble_cells(sp, true, [&](Index ci, Index cj, double (&a)[16][16]) {
    const double hx = m.hx(ci), hy = m.hy(cj), jac = hx * hy;
    PsiShape s;
    for (int qx = 0; qx < 5; ++qx)
      for (int qy = 0; qy < 5; ++qy) {
        eval_psi_shape(hx, hy, g.x[qx], g.x[qy], s);
        const double w = g.w[qx] * g.w[qy] * jac;
        for (int i = 0; i < 16; ++i)
          for (int j = 0; j < 16; ++j)
            a[i][j] += w * (s.dxx[i] + s.dyy[i]) * (s.dxx[j] + s.dyy[j]);
      }
  });
  f.M_psi = assemble_cells(sp, true, [&](Index ci, Index cj, double (&a)[16][16]) {
    const double hx = m.hx(ci), hy = m.hy(cj), jac = hx * hy;
    PsiShape s;
    for (int qx = 0; qx < 5; ++qx)
      for (int qy = 0; qy < 5; ++qy) {
        eval_psi_shape(hx, hy, g.x[qx], g.x[qy], s);
        const double w = g.w[qx] * g.w[qy] * jac;
        for (int i = 0; i < 16; ++i)
          for (int j = 0; j < 16; ++j) a[i][j] += w * s.v[i] * s.v[j];
      }
  });
  f.M = assemble_cells(sp, false, [&](Index ci, Index cj, double (&a)[16][16]) {
    const double hx = m.hx(ci), hy = m.hy(cj), jac = hx * hy;
    OmegaShape s;
    for (int qx = 0; qx < 5; ++qx)
      for (int qy = 0; qy < 5; ++qy) {
        eval_omega_shape(hx, hy, g.x[qx], g.x[qy], s);
        const double w = g.w[qx] * g.w[qy] * jac;
        for (int i = 0; i < 16; ++i)
          for (int j = 0; j < 16; ++j) a[i][j] += w * s.v[i] * s.v[j];
      }
  });
  f.R2 = assemble_cells(sp, false, [&](Index ci, Index cj, double (&a)[16][16]) {
    const double hx = m.hx(ci), hy = m.hy(cj), jac = hx * hy;
    OmegaShape s;
    for (int qx = 0; qx < 5; ++qx)
      for (int qy = 0; qy < 5; ++qy) {
        eval_omega_shape(hx, hy, g.x[qx], g.x[qy], s);
        const double w = g.w[qx] * g.w[qy] * jac;
        for (int i = 0; i < 16; ++i)
          for (int j = 0; j < 16; ++j) a[i][j] += w * (s.dx[i] * s.dx[j] + s.dy[i] * s.dy[j]);
      }
  });

  {
    TripletBuilder tb(sp.n_psi(), sp.n_omega());
    tb.reserve(static_cast<std::size_t>(m.cell_count()) * 256);
    PsiShape ps;
    OmegaShape os;
    for (Index cj = 0; cj < m.ny(); ++cj)
      for (Index ci = 0; ci < m.nx(); ++ci) {
        const double hx = m.hx(ci), hy = m.hy(cj), jac = hx * hy;
        double a[16][16] = {};
        for (int qx = 0; qx < 5; ++qx)
          for (int qy = 0; qy < 5; ++qy) {
            eval_psi_shape(hx, hy, g.x[qx], g.x[qy], ps);
            eval_omega_shape(hx, hy, g.x[qx], g.x[qy], os);
            const double w = g.w[qx] * g.w[qy] * jac;
            for (int i = 0; i < 16; ++i)
              for (int j = 0; j < 16; ++j) a[i][j] += w * ps.v[i] * os.v[j];
          }
        auto pd = sp.psi_cell_dofs(ci, cj);
        auto od = sp.omega_cell_dofs(ci, cj);
        for (int i = 0; i < 16; ++i)
          for (int j = 0; j < 16; ++j) tb.add(pd[i], od[j], a[i][j]);
      }
    f.M_mix = tb.build();
  }

  {
    const Index mt = sp.n_trace();
    TripletBuilder mb(mt, mt), b1(sp.n_psi(), mt), b3(sp.n_psi(), mt), b5(sp.n_omega(), mt);
    PsiShape ps;
    OmegaShape os;
    for (const auto& e : sp.boundary_edges()) {
      const double hx = m.hx(e.ci), hy = m.hy(e.cj);
      auto pd = sp.psi_cell_dofs(e.ci, e.cj);
      auto od = sp.omega_cell_dofs(e.ci, e.cj);
      const double nxv = kNormal[e.side][0], nyv = kNormal[e.side][1];
      for (int q = 0; q < 5; ++q) {
        const double u = g.x[q], w = g.w[q] * e.length;
        auto [tx, ty] = edge_point(e.side, u);
        eval_psi_shape(hx, hy, tx, ty, ps);
        eval_omega_shape(hx, hy, tx, ty, os);
        const double nu[2] = {1.0 - u, u};
        const Index td[2] = {e.ta, e.tb};
        for (int a = 0; a < 2; ++a) {
          for (int b = 0; b < 2; ++b) mb.add(td[a], td[b], w * nu[a] * nu[b]);
          for (int i = 0; i < 16; ++i) {
            b1.add(pd[i], td[a], w * ps.v[i] * nu[a]);
            b3.add(pd[i], td[a], w * (nxv * ps.dx[i] + nyv * ps.dy[i]) * nu[a]);
            b5.add(od[i], td[a], w * os.v[i] * nu[a]);
          }
        }
      }
    }
    f.M_bd = mb.build();
    f.B1 = b1.build();
    f.B3 = b3.build();
    f.B5 = b5.build();
  }
  return f;
}

SparseMatrix assemble_D1_raw(const Spaces2D& sp, const Vector& omega) {
  if (omega.size() != sp.n_omega()) throw DimensionError("assemble_D1: omega length");
  const Mesh2D& m = sp.mesh();
  const auto& g = gauss5();
  return assemble_cells(sp, true, [&](Index ci, Index cj, double (&a)[16][16]) {
    const double hx = m.hx(ci), hy = m.hy(cj), jac = hx * hy;
    auto od = sp.omega_cell_dofs(ci, cj);
    PsiShape ps;
    OmegaShape os;
    for (int qx = 0; qx < 5; ++qx)
      for (int qy = 0; qy < 5; ++qy) {
        eval_psi_shape(hx, hy, g.x[qx], g.x[qy], ps);
        eval_omega_shape(hx, hy, g.x[qx], g.x[qy], os);
        double wq = 0.0;
        for (int k = 0; k < 16; ++k) wq += omega[od[k]] * os.v[k];
        const double w = g.w[qx] * g.w[qy] * jac * wq;
        for (int i = 0; i < 16; ++i)
          for (int j = 0; j < 16; ++j) a[i][j] += w * (ps.dx[i] * ps.dy[j] - ps.dy[i] * ps.dx[j]);
      }
  });
}

SparseMatrix assemble_D2_raw(const Spaces2D& sp, const Vector& psi) {
  if (psi.size() != sp.n_psi()) throw DimensionError("assemble_D2: psi length");
  const Mesh2D& m = sp.mesh();
  const auto& g = gauss5();
  return assemble_cells(sp, false, [&](Index ci, Index cj, double (&a)[16][16]) {
    const double hx = m.hx(ci), hy = m.hy(cj), jac = hx * hy;
    auto pd = sp.psi_cell_dofs(ci, cj);
    PsiShape ps;
    OmegaShape os;
    for (int qx = 0; qx < 5; ++qx)
      for (int qy = 0; qy < 5; ++qy) {
        eval_psi_shape(hx, hy, g.x[qx], g.x[qy], ps);
        eval_omega_shape(hx, hy, g.x[qx], g.x[qy], os);
        double pq = 0.0;
        for (int k = 0; k < 16; ++k) pq += psi[pd[k]] * ps.v[k];
        const double w = g.w[qx] * g.w[qy] * jac * pq;
        for (int i = 0; i < 16; ++i)
          for (int j = 0; j < 16; ++j) a[i][j] += w * (os.dy[i] * os.dx[j] - os.dx[i] * os.dy[j]);
      }
  });
}

SparseMatrix assemble_D1(const Spaces2D& sp, const Vector& omega) {
  return skew_part(assemble_D1_raw(sp, omega));
}

SparseMatrix assemble_D2(const Spaces2D& sp, const Vector& psi) {
  return skew_part(assemble_D2_raw(sp, psi));
}

BoundaryModulated assemble_B2_B4(const Spaces2D& sp, const Vector& omega, const Vector& psi) {
  if (omega.size() != sp.n_omega() || psi.size() != sp.n_psi())
    throw DimensionError("assemble_B2_B4: field length");
  const Mesh2D& m = sp.mesh();
  const auto& g = gauss5();
  const Index mt = sp.n_trace();
  TripletBuilder b2(sp.n_psi(), mt), b4(sp.n_omega(), mt);
  PsiShape ps;
  OmegaShape os;
  for (const auto& e : sp.boundary_edges()) {
    const double hx = m.hx(e.ci), hy = m.hy(e.cj);
    auto pd = sp.psi_cell_dofs(e.ci, e.cj);
    auto od = sp.omega_cell_dofs(e.ci, e.cj);
    for (int q = 0; q < 5; ++q) {
      const double u = g.x[q], w = g.w[q] * e.length;
      auto [tx, ty] = edge_point(e.side, u);
      eval_psi_shape(hx, hy, tx, ty, ps);
      eval_omega_shape(hx, hy, tx, ty, os);
      double wq = 0.0, pq = 0.0;
      for (int k = 0; k < 16; ++k) {
        wq += omega[od[k]] * os.v[k];
        pq += psi[pd[k]] * ps.v[k];
      }
      const double nu[2] = {1.0 - u, u};
      const Index td[2] = {e.ta, e.tb};
      for (int a = 0; a < 2; ++a)
        for (int i = 0; i < 16; ++i) {
          b2.add(pd[i], td[a], w * ps.v[i] * wq * nu[a]);
          b4.add(od[i], td[a], w * os.v[i] * pq * nu[a]);
        }
    }
  }
  return {b2.build(), b4.build()};
}

ModulatedAssembler::ModulatedAssembler(const Spaces2D& sp) : sp_(sp) {
  const Mesh2D& m = sp_.mesh();
  auto zero_cells = [](Index, Index, double (&)[16][16]) {};
  psi_pattern_ = assemble_cells(sp_, true, zero_cells);
  omega_pattern_ = assemble_cells(sp_, false, zero_cells);
  const std::size_t cells = static_cast<std::size_t>(m.cell_count());
  psi_scatter_.resize(cells * 256);
  omega_scatter_.resize(cells * 256);
  std::size_t c = 0;
  for (Index cj = 0; cj < m.ny(); ++cj)
    for (Index ci = 0; ci < m.nx(); ++ci, ++c) {
      auto pd = sp_.psi_cell_dofs(ci, cj);
      auto od = sp_.omega_cell_dofs(ci, cj);
      for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) {
          psi_scatter_[c * 256 + 16 * i + j] = find_entry(psi_pattern_, pd[i], pd[j]);
          omega_scatter_[c * 256 + 16 * i + j] = find_entry(omega_pattern_, od[i], od[j]);
        }
    }
  auto transpose_map = [](const SparseMatrix& a) {
    std::vector<int> t(static_cast<std::size_t>(a.nnz()));
    auto ro = a.row_offsets();
    auto ci = a.col_indices();
    for (Index i = 0; i < a.rows(); ++i)
      for (int p = ro[i]; p < ro[i + 1]; ++p) t[p] = find_entry(a, ci[p], i);
    return t;
  };
  psi_transpose_ = transpose_map(psi_pattern_);
  omega_transpose_ = transpose_map(omega_pattern_);
}

SparseMatrix ModulatedAssembler::D1(const Vector& omega) const {
  if (omega.size() != sp_.n_omega()) throw DimensionError("D1: omega length");
  const Mesh2D& m = sp_.mesh();
  const auto& g = gauss5();
  std::vector<double> raw(static_cast<std::size_t>(psi_pattern_.nnz()), 0.0);
  PsiShape ps;
  OmegaShape os;
  std::size_t c = 0;
  for (Index cj = 0; cj < m.ny(); ++cj)
    for (Index ci = 0; ci < m.nx(); ++ci, ++c) {
      const double hx = m.hx(ci), hy = m.hy(cj), jac = hx * hy;
      auto od = sp_.omega_cell_dofs(ci, cj);
      double a[16][16] = {};
      for (int qx = 0; qx < 5; ++qx)
        for (int qy = 0; qy < 5; ++qy) {
          eval_psi_shape(hx, hy, g.x[qx], g.x[qy], ps);
          eval_omega_shape(hx, hy, g.x[qx], g.x[qy], os);
          double wq = 0.0;
          for (int k = 0; k < 16; ++k) wq += omega[od[k]] * os.v[k];
          if (wq == 0.0) continue;
          const double w = g.w[qx] * g.w[qy] * jac * wq;
          for (int i = 0; i < 16; ++i)
            for (int j = 0; j < 16; ++j)
              a[i][j] += w * (ps.dx[i] * ps.dy[j] - ps.dy[i] * ps.dx[j]);
        }
      const int* sc = &psi_scatter_[c * 256];
      for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) raw[sc[16 * i + j]] += a[i][j];
    }
  std::vector<double> v(raw.size());
  for (std::size_t p = 0; p < v.size(); ++p) v[p] = 0.5 * (raw[p] - raw[psi_transpose_[p]]);
  return SparseMatrix::with_values(psi_pattern_, std::move(v));
}

SparseMatrix ModulatedAssembler::D2(const Vector& psi) const {
  if (psi.size() != sp_.n_psi()) throw DimensionError("D2: psi length");
  const Mesh2D& m = sp_.mesh();
  const auto& g = gauss5();
  std::vector<double> raw(static_cast<std::size_t>(omega_pattern_.nnz()), 0.0);
  PsiShape ps;
  OmegaShape os;
  std::size_t c = 0;
  for (Index cj = 0; cj < m.ny(); ++cj)
    for (Index ci = 0; ci < m.nx(); ++ci, ++c) {
      const double hx = m.hx(ci), hy = m.hy(cj), jac = hx * hy;
      auto pd = sp_.psi_cell_dofs(ci, cj);
      double a[16][16] = {};
      for (int qx = 0; qx < 5; ++qx)
        for (int qy = 0; qy < 5; ++qy) {
          eval_psi_shape(hx, hy, g.x[qx], g.x[qy], ps);
          eval_omega_shape(hx, hy, g.x[qx], g.x[qy], os);
          double pq = 0.0;
          for (int k = 0; k < 16; ++k) pq += psi[pd[k]] * ps.v[k];
          if (pq == 0.0) continue;
          const double w = g.w[qx] * g.w[qy] * jac * pq;
          for (int i = 0; i < 16; ++i)
            for (int j = 0; j < 16; ++j)
              a[i][j] += w * (os.dy[i] * os.dx[j] - os.dx[i] * os.dy[j]);
        }
      const int* sc = &omega_scatter_[c * 256];
      for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) raw[sc[16 * i + j]] += a[i][j];
    }
  std::vector<double> v(raw.size());
  for (std::size_t p = 0; p < v.size(); ++p) v[p] = 0.5 * (raw[p] - raw[omega_transpose_[p]]);
  return SparseMatrix::with_values(omega_pattern_, std::move(v));
}

Vector interpolate_omega(const Spaces2D& sp, const ScalarField2D& f) {
  Vector w(sp.n_omega());
  for (Index J = 0; J < sp.omega_ny(); ++J)
    for (Index I = 0; I < sp.omega_nx(); ++I) w[sp.omega_dof(I, J)] = f(sp.omega_x(I), sp.omega_y(J));
  return w;
}

Vector interpolate_psi(const Spaces2D& sp, const ScalarField2D& f, const ScalarField2D& fx,
                       const ScalarField2D& fy, const ScalarField2D& fxy) {
  const Mesh2D& m = sp.mesh();
  Vector p(sp.n_psi());
  for (Index j = 0; j <= m.ny(); ++j)
    for (Index i = 0; i <= m.nx(); ++i) {
      const double x = m.xlines()[i], y = m.ylines()[j];
      p[sp.psi_dof(i, j, Spaces2D::kValue)] = f(x, y);
      p[sp.psi_dof(i, j, Spaces2D::kDx)] = fx(x, y);
      p[sp.psi_dof(i, j, Spaces2D::kDy)] = fy(x, y);
      p[sp.psi_dof(i, j, Spaces2D::kDxy)] = fxy(x, y);
    }
  return p;
}

double evaluate_psi(const Spaces2D& sp, const Vector& psi, double x, double y) {
  const Mesh2D& m = sp.mesh();
  auto [ci, tx] = locate(m.xlines(), x);
  auto [cj, ty] = locate(m.ylines(), y);
  PsiShape s;
  eval_psi_shape(m.hx(ci), m.hy(cj), tx, ty, s);
  auto d = sp.psi_cell_dofs(ci, cj);
  double v = 0.0;
  for (int k = 0; k < 16; ++k) v += psi[d[k]] * s.v[k];
  return v;
}

double evaluate_omega(const Spaces2D& sp, const Vector& omega, double x, double y) {
  const Mesh2D& m = sp.mesh();
  auto [ci, tx] = locate(m.xlines(), x);
  auto [cj, ty] = locate(m.ylines(), y);
  OmegaShape s;
  eval_omega_shape(m.hx(ci), m.hy(cj), tx, ty, s);
  auto d = sp.omega_cell_dofs(ci, cj);
  double v = 0.0;
  for (int k = 0; k < 16; ++k) v += omega[d[k]] * s.v[k];
  return v;
}

Vector solve_poisson_dirichlet(const Spaces2D& sp, const Forms2D& forms, const Vector& omega) {
  if (omega.size() != sp.n_omega()) throw DimensionError("solve_poisson_dirichlet: omega length");
  const Index n = sp.n_psi();
  std::vector<char> fixed(static_cast<std::size_t>(n), 0);
  for (Index d : sp.psi_dirichlet_dofs()) fixed[d] = 1;
  std::vector<Index> free;
  for (Index i = 0; i < n; ++i)
    if (!fixed[i]) free.push_back(i);
  SparseMatrix kff = submatrix(forms.K, free, free);
  Vector rhs = forms.M_mix * omega;
  Vector rf(static_cast<Index>(free.size()));
  for (std::size_t k = 0; k < free.size(); ++k) rf[k] = rhs[free[k]];
  Factorization f(kff, true);
  Vector xf = f.solve(rf);
  double res = (kff * xf - rf).norm();
  if (res > 1e-10 * std::max(rf.norm(), 1e-300) && rf.norm() > 0.0)
    throw ConvergenceError("solve_poisson_dirichlet: residual " + std::to_string(res));
  Vector psi = Vector::Zero(n);
  for (std::size_t k = 0; k < free.size(); ++k) psi[free[k]] = xf[k];
  return psi;
}

}  // namespace phfem
