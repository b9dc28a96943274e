#include "phfem/basis.hpp"

#include <cmath>

namespace phfem::basis {

const GaussRule& gauss5() {
  static const GaussRule rule = [] {
    const double a = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
    const double b = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
    const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
    const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
    const double x[5] = {-b, -a, 0.0, a, b};
    const double w[5] = {wb, wa, 128.0 / 225.0, wa, wb};
    GaussRule r{};
    for (int i = 0; i < 5; ++i) {
      r.x[i] = 0.5 * (x[i] + 1.0);
      r.w[i] = 0.5 * w[i];
    }
    return r;
  }();
  return rule;
}

double hermite(int k, int d, double t, double h) {
  const double t2 = t * t, t3 = t2 * t;
  switch (d) {
    case 0:
      switch (k) {
        case 0: return 1.0 - 3.0 * t2 + 2.0 * t3;
        case 1: return h * (t - 2.0 * t2 + t3);
        case 2: return 3.0 * t2 - 2.0 * t3;
        default: return h * (t3 - t2);
      }
    case 1:
      switch (k) {
        case 0: return (-6.0 * t + 6.0 * t2) / h;
        case 1: return 1.0 - 4.0 * t + 3.0 * t2;
        case 2: return (6.0 * t - 6.0 * t2) / h;
        default: return 3.0 * t2 - 2.0 * t;
      }
    default:
      switch (k) {
        case 0: return (-6.0 + 12.0 * t) / (h * h);
        case 1: return (-4.0 + 6.0 * t) / h;
        case 2: return (6.0 - 12.0 * t) / (h * h);
        default: return (6.0 * t - 2.0) / h;
      }
  }
}

double lagrange3(int k, int d, double t, double h) {
  static constexpr double nodes[4] = {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
  // Product form: L_k = prod_{m != k} (t - t_m) / (t_k - t_m).
  double denom = 1.0;
  double others[3];
  int c = 0;
  for (int m = 0; m < 4; ++m) {
    if (m == k) continue;
    denom *= nodes[k] - nodes[m];
    others[c++] = nodes[m];
  }
  const double a = t - others[0], b = t - others[1], e = t - others[2];
  double v;
  switch (d) {
    case 0: v = a * b * e; break;
    case 1: v = (a * b + a * e + b * e) / h; break;
    default: v = 2.0 * (a + b + e) / (h * h); break;
  }
  return v / denom;
}

}  // namespace phfem::basis
