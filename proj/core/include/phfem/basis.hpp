#pragma once

#include <array>

namespace phfem::basis {

/// Five-point Gauss-Legendre rule mapped to [0,1].
struct GaussRule {
  std::array<double, 5> x;
  std::array<double, 5> w;
};
const GaussRule& gauss5();

/// Cubic Hermite shape functions on a cell of width h, reference t in [0,1].
/// k: 0 value at 0, 1 slope at 0, 2 value at 1, 3 slope at 1.
/// d: derivative order (0..2) with respect to the physical coordinate.
double hermite(int k, int d, double t, double h);

/// Cubic Lagrange shape functions with nodes 0, 1/3, 2/3, 1.
double lagrange3(int k, int d, double t, double h);

}  // namespace phfem::basis
