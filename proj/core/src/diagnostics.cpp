#include "phfem/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "phfem/errors.hpp"
#include "phfem/fem1d.hpp"
#include "phfem/spectral.hpp"

namespace phfem::diag {

namespace {

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

}  // namespace

BalanceSummary balance_summary(const std::vector<double>& t, const std::vector<double>& H,
                               const std::vector<double>& residual) {
  if (t.size() != H.size() || (!residual.empty() && residual.size() != t.size()))
    throw InvalidArgument("balance_summary: series lengths differ");
  if (t.size() < 2) throw InvalidArgument("balance_summary: need at least two samples");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || !std::isfinite(H[i]))
      throw InvalidArgument("balance_summary: non-finite sample at row " + std::to_string(i));
    if (i > 0 && t[i] < t[i - 1])
      throw InvalidArgument("balance_summary: times decrease at row " + std::to_string(i));
  }
  BalanceSummary s;
  s.samples = t.size();
  s.t0 = t.front();
  s.t1 = t.back();
  s.H0 = H.front();
  s.H_final = H.back();
  s.scale = std::max(1.0, std::abs(s.H0));
  std::vector<double> d(H.size());
  for (std::size_t i = 0; i < H.size(); ++i) {
    d[i] = (H[i] - s.H0) / s.scale;
    s.max_drift = std::max(s.max_drift, std::abs(d[i]));
  }
  s.final_drift = d.back();
  s.drift_slope = slope(t, d);
  if (!residual.empty()) {
    double sum = 0.0;
    for (double r : residual) {
      if (!std::isfinite(r)) throw InvalidArgument("balance_summary: non-finite residual");
      s.max_residual = std::max(s.max_residual, std::abs(r) / s.scale);
      sum += std::abs(r) / s.scale;
    }
    s.mean_residual = sum / static_cast<double>(residual.size());
  }
  return s;
}

BalanceSummary balance_summary(const CsvTable& table, const std::string& t_col,
                               const std::string& h_col, const std::string& residual_col) {
  return balance_summary(table.values(t_col), table.values(h_col),
                         residual_col.empty() ? std::vector<double>{} : table.values(residual_col));
}

std::vector<ConditionEntry> condition_sweep(const std::vector<double>& ells,
                                            const std::vector<Index>& Ns, double a, double b) {
  std::vector<ConditionEntry> out;
  for (Index n : Ns) {
    Mesh1D mesh = Mesh1D::uniform(a, b, n);
    Forms1D f = assemble_forms(mesh, [](double) { return 1.0; });
    SparseMatrix bbt = product(f.B, f.B.transpose());
    for (double ell : ells) {
      if (ell < 0.0) throw InvalidArgument("condition_sweep: ell must be non-negative");
      SparseMatrix a_ell = axpby(1.0, f.M, ell * ell, f.K);
      a_ell = axpby(1.0, a_ell, ell, bbt);
      out.push_back({n, ell, condition_number_estimate(a_ell)});
    }
  }
  return out;
}

double convergence_order(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size()) throw InvalidArgument("convergence_order: length mismatch");
  if (h.size() < 3) throw InvalidArgument("convergence_order: need at least three levels");
  std::vector<double> lx(h.size()), ly(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0) || !(err[i] > 0.0))
      throw InvalidArgument("convergence_order: mesh sizes and errors must be positive");
    lx[i] = std::log(h[i]);
    ly[i] = std::log(err[i]);
  }
  return slope(lx, ly);
}

void write_report(std::ostream& os, const std::string& name, const BalanceSummary& s) {
  os << "[" << name << "]\n"
     << "samples = " << s.samples << "\n"
     << "t_start = " << num(s.t0) << "\n"
     << "t_end = " << num(s.t1) << "\n"
     << "H_start = " << num(s.H0) << "\n"
     << "H_end = " << num(s.H_final) << "\n"
     << "scale = " << num(s.scale) << "\n"
     << "max_drift = " << num(s.max_drift) << "\n"
     << "final_drift = " << num(s.final_drift) << "\n"
     << "drift_slope = " << num(s.drift_slope) << "\n"
     << "max_residual = " << num(s.max_residual) << "\n"
     << "mean_residual = " << num(s.mean_residual) << "\n";
}

void write_condition_csv(const std::string& path, const std::vector<ConditionEntry>& table) {
  CsvWriter w(path, {"N", "ell", "kappa"});
  for (const auto& e : table) w.row({static_cast<double>(e.N), e.ell, e.kappa});
}

}  // namespace phfem::diag
