// phfem command line driver. Every run directory receives resolved.cfg,
// versions.txt and either the model outputs or error.log.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "phfem/beam.hpp"
#include "phfem/bundle_io.hpp"
#include "phfem/config.hpp"
#include "phfem/csv.hpp"
#include "phfem/diagnostics.hpp"
#include "phfem/inse.hpp"
#include "phfem/nanorod.hpp"
#include "phfem/structures.hpp"

namespace fs = std::filesystem;
using namespace phfem;

namespace {

enum Exit { kOk = 0, kConfig = 1, kSolver = 2, kStructure = 3 };

class StructureFailure : public Error {
 public:
  using Error::Error;
};

struct Options {
  std::string config, out, snapshots, model;
  int threads = 0;
  long long seed = -1;
};

std::string join(const fs::path& dir, const std::string& name) { return (dir / name).string(); }

void run_nanorod(const cfg::RunConfig& c, const fs::path& out) {
  nanorod::Model m(c.nanorod.to_config());
  auto r = nanorod::run(m);
  nanorod::write_csv(join(out, "energy.csv"), r);
  std::vector<double> t, h, res;
  for (const auto& s : r.series) {
    t.push_back(s.t);
    h.push_back(s.e.H_rob);
    res.push_back(s.balance_residual);
  }
  std::ofstream rep(out / "summary.txt");
  diag::write_report(rep, "nanorod", diag::balance_summary(t, h, res));
  rep << "max_relative_drift = " << r.max_relative_drift << "\n";
}

void run_beam(const cfg::RunConfig& c, const fs::path& out) {
  beam::Model m(c.beam);
  auto r = beam::run(m);
  beam::write_series_csv(join(out, "hamiltonian.csv"), r);
  if (!r.snapshots.empty()) beam::write_snapshots_csv(join(out, "deflection.csv"), m, r);
  std::vector<double> t, h, res;
  for (const auto& s : r.series) {
    t.push_back(s.t);
    h.push_back(s.H1);
    res.push_back(s.res1);
  }
  std::ofstream rep(out / "summary.txt");
  diag::write_report(rep, "beam", diag::balance_summary(t, h, res));
  rep << "max_relative_variation_H1 = " << r.max_relative_variation_H1 << "\n"
      << "max_relative_variation_H2 = " << r.max_relative_variation_H2 << "\n"
      << "steps = " << r.steps << "\nrejected = " << r.rejected << "\n";
}

void run_inse(const cfg::RunConfig& c, const fs::path& out) {
  inse::Solver solver(c.inse);
  inse::RunOptions opt;
  opt.out_dir = out.string();
  auto r = inse::run(solver, opt);
  std::vector<double> t, k;
  for (const auto& l : r.series) {
    t.push_back(l.t);
    k.push_back(l.K);
  }
  std::ofstream rep(out / "summary.txt");
  diag::write_report(rep, "inse_kinetic", diag::balance_summary(t, k));
  rep << "omega_e = " << r.omega_e << "\n"
      << "max_res_power = " << r.max_res_power << "\n"
      << "max_res_enstrophy = " << r.max_res_enstrophy << "\n"
      << "max_constraint = " << r.max_constraint << "\n"
      << "steps = " << r.steps << "\n";
}

// Verifies one bundle, dumps it and records the outcome.
bool check_bundle(const std::string& name, const PHSystemBundle& b, const cfg::RunConfig& c,
                  const fs::path& out, std::ostream& log) {
  StructureReport rep = verify_structure(b);
  log << name << ": " << (rep.passed() ? "PASS" : "FAIL") << "  " << rep.summary() << "\n";
  if (c.check.dump) {
    fs::create_directories(out / name);
    write_bundle((out / name).string(), b);
  }
  return rep.passed();
}

void run_check(const cfg::RunConfig& c, const fs::path& out) {
  std::ofstream log(out / "structure_report.txt");
  const auto& tgt = c.check.target;
  bool ok = true;
  if (tgt == "nanorod" || tgt == "all") {
    nanorod::Model m(c.nanorod.to_config());
    ok &= check_bundle("nanorod_robin", nanorod::build_system(m), c, out, log);
    ok &= check_bundle("nanorod_free", nanorod::build_system_free(m), c, out, log);
  }
  if (tgt == "beam" || tgt == "all") {
    beam::Config bc = c.beam;
    bc.implicit = true;
    ok &= check_bundle("beam_implicit", beam::build_system(beam::Model(bc)), c, out, log);
    bc.implicit = false;
    ok &= check_bundle("beam_explicit", beam::build_system(beam::Model(bc)), c, out, log);
  }
  if (tgt == "inse" || tgt == "all") {
    inse::Config ic = c.inse;
    ic.nx = ic.ny = c.check.inse_cells;
    inse::Solver solver(ic);
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> nd;
    for (int k = 0; k < c.check.random_states; ++k) {
      inse::State s;
      s.psi = Vector::NullaryExpr(solver.spaces().n_psi(), [&] { return nd(rng); });
      s.omega = Vector::NullaryExpr(solver.spaces().n_omega(), [&] { return nd(rng); });
      ok &= check_bundle("inse_frozen_" + std::to_string(k), solver.frozen_system(s), c, out, log);
    }
  }
  log.flush();
  if (!ok) throw StructureFailure("structure check failed, see structure_report.txt");
}

// Runs jobs on `threads` workers; the first exception is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& job) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex mu;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard lk(mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < std::min<int>(threads, static_cast<int>(n)); ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

std::string tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void run_sweep(const cfg::RunConfig& c, const fs::path& out) {
  const auto& sw = c.sweep;
  if (sw.kind == "condition") {
    auto table = diag::condition_sweep(sw.ell, sw.nodes, c.nanorod.a, c.nanorod.b);
    diag::write_condition_csv(join(out, "condition.csv"), table);
  } else if (sw.kind == "nanorod_ell") {
    std::vector<double> drift(sw.ell.size());
    parallel_for(sw.ell.size(), c.threads, [&](std::size_t i) {
      cfg::NanorodParams p = c.nanorod;
      p.ell = sw.ell[i];
      nanorod::Model m(p.to_config());
      auto r = nanorod::run(m);
      fs::path dir = out / ("ell_" + tag(p.ell));
      fs::create_directories(dir);
      nanorod::write_csv(join(dir, "energy.csv"), r);
      drift[i] = r.max_relative_drift;
    });
    CsvWriter w(join(out, "ell_sweep.csv"), {"ell", "max_relative_drift"});
    for (std::size_t i = 0; i < drift.size(); ++i) w.row({sw.ell[i], drift[i]});
  } else {
    parallel_for(sw.dx.size(), c.threads, [&](std::size_t i) {
      beam::Config bc = c.beam;
      bc.dx = sw.dx[i];
      beam::Model m(bc);
      beam::write_phase_csv(join(out, "phase_dx" + tag(bc.dx) + ".csv"),
                            beam::phase_velocity_table(m, sw.modes));
    });
  }
}

cfg::RunConfig resolve(const std::string& sub, const Options& o) {
  cfg::RunConfig c;
  if (!o.config.empty()) {
    c = cfg::parse_config(o.config);
    if (c.model != sub)
      throw ConfigError("config selects model '" + c.model + "' but the subcommand is '" + sub + "'");
  } else {
    c.model = sub;
  }
  if (!o.out.empty()) c.out = o.out;
  if (!o.snapshots.empty()) cfg::set_snapshots(c, o.snapshots);
  if (o.threads > 0) c.threads = o.threads;
  if (o.seed >= 0) c.seed = static_cast<std::uint64_t>(o.seed);
  if (!o.model.empty()) c.check.target = o.model;
  cfg::validate(c);
  return c;
}

void log_error(const fs::path& out, const std::string& what) {
  std::cerr << "error: " << what << "\n";
  std::error_code ec;
  fs::create_directories(out, ec);
  if (!ec) std::ofstream(out / "error.log") << what << "\n";
}

int dispatch(const std::string& sub, const Options& o, int argc, char** argv) {
  fs::path out = o.out.empty() ? fs::path("out") : fs::path(o.out);
  cfg::RunConfig c;
  try {
    c = resolve(sub, o);
    out = c.out;
    std::string cmd;
    for (int i = 0; i < argc; ++i) cmd += (i ? " " : "") + std::string(argv[i]);
    cfg::write_run_manifest(out.string(), c,
                            {{"command", cmd}, {"seed", std::to_string(c.seed)}});
    fs::remove(out / "error.log");
  } catch (const ConfigError& e) {
    log_error(out, e.what());
    return kConfig;
  } catch (const std::exception& e) {
    log_error(out, e.what());
    return kConfig;
  }
  try {
    if (sub == "nanorod") run_nanorod(c, out);
    if (sub == "beam") run_beam(c, out);
    if (sub == "inse") run_inse(c, out);
    if (sub == "check") run_check(c, out);
    if (sub == "sweep") run_sweep(c, out);
  } catch (const StructureFailure& e) {
    log_error(out, e.what());
    return kStructure;
  } catch (const ConfigError& e) {
    log_error(out, e.what());
    return kConfig;
  } catch (const std::exception& e) {
    log_error(out, e.what());
    return kSolver;
  }
  std::cout << sub << ": outputs written to " << out.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure-preserving port-Hamiltonian finite element solvers"};
  app.require_subcommand(1);
  Options o;
  bool keys = false;

  auto add_common = [&](CLI::App* s) {
    s->add_option("--config", o.config, "INI configuration file");
    s->add_option("--out", o.out, "Output directory");
    s->add_option("--snapshots", o.snapshots, "Comma separated snapshot times in s");
    s->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
    s->add_option("--seed", o.seed, "Seed for randomized checks")->check(CLI::NonNegativeNumber);
  };
  add_common(app.add_subcommand("nanorod", "Nonlocal nanorod with Robin energy ports"));
  add_common(app.add_subcommand("beam", "Simply supported implicit or explicit beam"));
  add_common(app.add_subcommand("inse", "Dipole-wall collision in a closed box"));
  add_common(app.add_subcommand("sweep", "Condition, nonlocal-length or dispersion sweeps"));
  auto* check = app.add_subcommand("check", "Verify the structure of every assembled bundle");
  add_common(check);
  check->add_option("--model", o.model, "nanorod, beam, inse or all")
      ->check(CLI::IsMember({"nanorod", "beam", "inse", "all"}));
  auto* version = app.add_subcommand("version", "Print version information");
  version->add_flag("--keys", keys, "Print the configuration key table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  if (version->parsed()) {
    if (keys) {
      std::cout << cfg::key_table_markdown();
    } else {
      std::cout << "phfem " << cfg::version() << "\n";
    }
    return kOk;
  }
  const std::string sub = app.get_subcommands().front()->get_name();
  return dispatch(sub, o, argc, argv);
}
