#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "phfem/csv.hpp"
#include "phfem/sparse.hpp"

namespace phfem::diag {

/// Energy trace summary. Drift and residuals are divided by
/// max(1, |H(0)|) so that trivial runs do not divide by zero.
struct BalanceSummary {
  std::size_t samples = 0;
  double t0 = 0.0, t1 = 0.0;
  double H0 = 0.0, H_final = 0.0;
  double scale = 1.0;
  double max_drift = 0.0;    // max |H(t) - H(0)| / scale
  double final_drift = 0.0;  // (H(T) - H(0)) / scale, signed
  double drift_slope = 0.0;  // least-squares slope of (H - H0)/scale against t
  double max_residual = 0.0, mean_residual = 0.0;
};

/// `residual` may be empty. Throws InvalidArgument on length mismatch,
/// fewer than two samples, non-finite values or decreasing times.
BalanceSummary balance_summary(const std::vector<double>& t, const std::vector<double>& H,
                               const std::vector<double>& residual = {});
BalanceSummary balance_summary(const CsvTable& table, const std::string& t_col,
                               const std::string& h_col, const std::string& residual_col = "");

struct ConditionEntry {
  Index N = 0;
  double ell = 0.0;
  double kappa = 0.0;
};

/// kappa(M + l^2 K + l B B^T) on uniform P1 meshes of [a, b] with N nodes.
/// Entries are ordered N-major in the order given.
std::vector<ConditionEntry> condition_sweep(const std::vector<double>& ells,
                                            const std::vector<Index>& Ns, double a = 0.0,
                                            double b = 1.0);

/// Least-squares slope of log(err) against log(h). Needs at least three
/// levels and strictly positive values.
double convergence_order(const std::vector<double>& h, const std::vector<double>& err);

void write_report(std::ostream& os, const std::string& name, const BalanceSummary& s);
void write_condition_csv(const std::string& path, const std::vector<ConditionEntry>& table);

}  // namespace phfem::diag
