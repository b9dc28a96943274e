#include "phfem/fem1d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace phfem {

Mesh1D::Mesh1D(std::vector<double> nodes) : x_(std::move(nodes)) {
  if (x_.size() < 2) throw InvalidArgument("Mesh1D needs at least two nodes");
  for (std::size_t i = 1; i < x_.size(); ++i)
    if (!(x_[i] > x_[i - 1])) throw InvalidArgument("Mesh1D nodes must be strictly increasing");
}

Mesh1D Mesh1D::uniform(double a, double b, Index n_nodes) {
  if (n_nodes < 2 || !(b > a)) throw InvalidArgument("Mesh1D::uniform: bad interval or count");
  std::vector<double> x(static_cast<std::size_t>(n_nodes));
  const double h = (b - a) / static_cast<double>(n_nodes - 1);
  for (Index i = 0; i < n_nodes; ++i) x[i] = a + h * static_cast<double>(i);
  x.back() = b;
  return Mesh1D(std::move(x));
}

Forms1D assemble_forms(const Mesh1D& mesh, const ScalarField1D& rho) {
  const Index n = mesh.size();
  TripletBuilder m(n, n), mr(n, n), k(n, n), d(n, n);
  // Two-point Gauss on [0,1]
  const double g = 0.5 / std::sqrt(3.0);
  const double qs[2] = {0.5 - g, 0.5 + g};
  for (Index e = 0; e < mesh.elements(); ++e) {
    const double x0 = mesh.node(e), x1 = mesh.node(e + 1), h = x1 - x0;
    const Index id[2] = {e, e + 1};
    double me[2][2] = {{h / 3.0, h / 6.0}, {h / 6.0, h / 3.0}};
    double ke[2][2] = {{1.0 / h, -1.0 / h}, {-1.0 / h, 1.0 / h}};
    // D_ij = int phi_i phi_j'
    double de[2][2] = {{-0.5, 0.5}, {-0.5, 0.5}};
    double re[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (double t : qs) {
      double r = rho(x0 + t * h);
      if (!(r > 0.0))
        throw InvalidArgument("assemble_forms: non-positive density " + std::to_string(r) +
                              " at x=" + std::to_string(x0 + t * h));
      double phi[2] = {1.0 - t, t};
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) re[i][j] += 0.5 * h * r * phi[i] * phi[j];
    }
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        m.add(id[i], id[j], me[i][j]);
        mr.add(id[i], id[j], re[i][j]);
        k.add(id[i], id[j], ke[i][j]);
        d.add(id[i], id[j], de[i][j]);
      }
  }
  TripletBuilder bb(n, 2);
  bb.add(0, 0, 1.0);
  bb.add(n - 1, 1, 1.0);
  return {m.build(), mr.build(), k.build(), d.build(), bb.build(), SparseMatrix::identity(2)};
}

Vector interpolate_p1(const Mesh1D& mesh, const ScalarField1D& f) {
  Vector u(mesh.size());
  for (Index i = 0; i < mesh.size(); ++i) u[i] = f(mesh.node(i));
  return u;
}

double l2_norm(const Mesh1D& mesh, const Forms1D& forms, const Vector& u) {
  if (u.size() != mesh.size()) throw DimensionError("l2_norm: vector length != node count");
  return std::sqrt(std::max(0.0, u.dot(forms.M * u)));
}

double evaluate_p1(const Mesh1D& mesh, const Vector& u, double x) {
  const auto& xs = mesh.nodes();
  if (x <= xs.front()) return u[0];
  if (x >= xs.back()) return u[mesh.size() - 1];
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  Index e = static_cast<Index>(it - xs.begin()) - 1;
  double t = (x - xs[e]) / (xs[e + 1] - xs[e]);
  return (1.0 - t) * u[e] + t * u[e + 1];
}

}  // namespace phfem
