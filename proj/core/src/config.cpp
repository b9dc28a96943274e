#include "phfem/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/version.hpp>
#include <umfpack.h>

#include "phfem/errors.hpp"

#ifndef PHFEM_VERSION
#define PHFEM_VERSION "0.0.0"
#endif
#ifndef PHFEM_BLAS
#define PHFEM_BLAS "system"
#endif

namespace phfem::cfg {

nanorod::Config NanorodParams::to_config() const {
  nanorod::Config c;
  c.E = E;
  const double r = rho;
  c.rho = [r](double) { return r; };
  c.ell = ell;
  c.a = a;
  c.b = b;
  c.nodes = nodes;
  const double amp = v0_amplitude, x0 = v0_center, w = v0_width;
  c.v0 = [amp, x0, w](double x) { return amp * std::exp(-w * (x - x0) * (x - x0)); };
  c.sigma0 = [](double) { return 0.0; };
  c.dt = dt;
  c.t_final = t_final;
  return c;
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <class T>
std::string fmt_int(T v) {
  return std::to_string(v);
}

std::string fmt(bool v) { return v ? "true" : "false"; }

template <class T>
std::string fmt_list(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    if constexpr (std::is_floating_point_v<T>)
      s += fmt(v[i]);
    else
      s += fmt_int(v[i]);
  }
  return s;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& text, const char* want) {
  throw ConfigError("key " + key + ": cannot read '" + text + "' as " + want);
}

double to_double(const std::string& key, const std::string& raw) {
  std::string s = trim(raw);
  double v = 0.0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
    bad_value(key, raw, "a finite number");
  return v;
}

template <class T>
T to_int(const std::string& key, const std::string& raw) {
  std::string s = trim(raw);
  T v{};
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
    bad_value(key, raw, "an integer");
  return v;
}

bool to_bool(const std::string& key, const std::string& raw) {
  std::string s = trim(raw);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  bad_value(key, raw, "a boolean");
}

template <class T, class F>
std::vector<T> to_list(const std::string& raw, F item) {
  std::vector<T> out;
  std::string s = trim(raw);
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(item(part));
  return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& raw) {
  return to_list<double>(raw, [&](const std::string& p) { return to_double(key, p); });
}

struct Binding {
  KeyInfo info;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

// `ref` maps a config to the bound field.
template <class Ref>
Binding real(std::string sec, std::string name, std::string unit, std::string desc, Ref ref) {
  std::string key = sec + "." + name;
  return {{sec, name, unit, desc, "", false},
          [ref, key](RunConfig& c, const std::string& s) { ref(c) = to_double(key, s); },
          [ref](const RunConfig& c) { return fmt(ref(const_cast<RunConfig&>(c))); }};
}

template <class T, class Ref>
Binding integer(std::string sec, std::string name, std::string unit, std::string desc, Ref ref) {
  std::string key = sec + "." + name;
  return {{sec, name, unit, desc, "", false},
          [ref, key](RunConfig& c, const std::string& s) { ref(c) = to_int<T>(key, s); },
          [ref](const RunConfig& c) { return fmt_int(ref(const_cast<RunConfig&>(c))); }};
}

template <class Ref>
Binding boolean(std::string sec, std::string name, std::string desc, Ref ref) {
  std::string key = sec + "." + name;
  return {{sec, name, "-", desc, "", false},
          [ref, key](RunConfig& c, const std::string& s) { ref(c) = to_bool(key, s); },
          [ref](const RunConfig& c) { return fmt(ref(const_cast<RunConfig&>(c))); }};
}

template <class Ref>
Binding text(std::string sec, std::string name, std::string desc, Ref ref, bool required = false) {
  return {{sec, name, "-", desc, "", required},
          [ref](RunConfig& c, const std::string& s) { ref(c) = trim(s); },
          [ref](const RunConfig& c) { return ref(const_cast<RunConfig&>(c)); }};
}

std::vector<Binding> make_bindings() {
  std::vector<Binding> b;
  // [run]
  b.push_back(text("run", "model", "nanorod | beam | inse | check | sweep",
                   [](RunConfig& c) -> std::string& { return c.model; }, true));
  b.push_back(text("run", "out", "output directory (overridden by --out)",
                   [](RunConfig& c) -> std::string& { return c.out; }));
  b.push_back({{"run", "snapshots", "s", "comma separated snapshot times", "", false},
               [](RunConfig& c, const std::string& s) { set_snapshots(c, s); },
               [](const RunConfig& c) { return fmt_list(c.snapshots); }});
  b.push_back(integer<std::uint64_t>("run", "seed", "-", "seed for randomized checks",
                                     [](RunConfig& c) -> std::uint64_t& { return c.seed; }));
  b.push_back(integer<int>("run", "threads", "-", "worker threads for sweep",
                           [](RunConfig& c) -> int& { return c.threads; }));

  // [nanorod]
  auto nr = [](RunConfig& c) -> NanorodParams& { return c.nanorod; };
  b.push_back(real("nanorod", "E", "Pa", "Young modulus", [nr](RunConfig& c) -> double& { return nr(c).E; }));
  b.push_back(real("nanorod", "rho", "kg/m", "linear density", [nr](RunConfig& c) -> double& { return nr(c).rho; }));
  b.push_back(real("nanorod", "ell", "m", "nonlocal length scale", [nr](RunConfig& c) -> double& { return nr(c).ell; }));
  b.push_back(real("nanorod", "a", "m", "left end", [nr](RunConfig& c) -> double& { return nr(c).a; }));
  b.push_back(real("nanorod", "b", "m", "right end", [nr](RunConfig& c) -> double& { return nr(c).b; }));
  b.push_back(integer<Index>("nanorod", "nodes", "-", "P1 nodes", [nr](RunConfig& c) -> Index& { return nr(c).nodes; }));
  b.push_back(real("nanorod", "v0_amplitude", "m/s", "initial velocity peak", [nr](RunConfig& c) -> double& { return nr(c).v0_amplitude; }));
  b.push_back(real("nanorod", "v0_center", "m", "initial velocity centre", [nr](RunConfig& c) -> double& { return nr(c).v0_center; }));
  b.push_back(real("nanorod", "v0_width", "1/m^2", "Gaussian exponent factor", [nr](RunConfig& c) -> double& { return nr(c).v0_width; }));
  b.push_back(real("nanorod", "dt", "s", "time step", [nr](RunConfig& c) -> double& { return nr(c).dt; }));
  b.push_back(real("nanorod", "t_final", "s", "final time", [nr](RunConfig& c) -> double& { return nr(c).t_final; }));

  // [beam]
  auto bm = [](RunConfig& c) -> beam::Config& { return c.beam; };
  b.push_back(real("beam", "rho", "kg/m^3", "density", [bm](RunConfig& c) -> double& { return bm(c).rho; }));
  b.push_back(real("beam", "E", "Pa", "Young modulus", [bm](RunConfig& c) -> double& { return bm(c).E; }));
  b.push_back(real("beam", "nu", "-", "Poisson ratio", [bm](RunConfig& c) -> double& { return bm(c).nu; }));
  b.push_back(real("beam", "radius", "m", "cross-section radius", [bm](RunConfig& c) -> double& { return bm(c).radius; }));
  b.push_back(real("beam", "a", "m", "left support", [bm](RunConfig& c) -> double& { return bm(c).a; }));
  b.push_back(real("beam", "b", "m", "right support", [bm](RunConfig& c) -> double& { return bm(c).b; }));
  b.push_back(real("beam", "dx", "m", "element length", [bm](RunConfig& c) -> double& { return bm(c).dx; }));
  b.push_back(boolean("beam", "implicit", "keep rotary inertia", [bm](RunConfig& c) -> bool& { return bm(c).implicit; }));
  b.push_back(real("beam", "rotary_inertia_scale", "-", "multiplier on rotary inertia", [bm](RunConfig& c) -> double& { return bm(c).rotary_inertia_scale; }));
  b.push_back(real("beam", "dt0", "s", "initial step", [bm](RunConfig& c) -> double& { return bm(c).dt0; }));
  b.push_back(real("beam", "t_final", "s", "final time", [bm](RunConfig& c) -> double& { return bm(c).t_final; }));
  b.push_back(real("beam", "tol", "-", "relative local error target", [bm](RunConfig& c) -> double& { return bm(c).tol; }));
  b.push_back(real("beam", "bump_amplitude", "m", "initial deflection peak", [bm](RunConfig& c) -> double& { return bm(c).bump_amplitude; }));
  b.push_back(real("beam", "bump_width", "1/m^2", "Gaussian exponent factor", [bm](RunConfig& c) -> double& { return bm(c).bump_width; }));
  b.push_back(real("beam", "bump_center", "m", "initial deflection centre", [bm](RunConfig& c) -> double& { return bm(c).bump_center; }));

  // [inse]
  auto in = [](RunConfig& c) -> inse::Config& { return c.inse; };
  b.push_back(real("inse", "rho0", "kg/m^3", "density", [in](RunConfig& c) -> double& { return in(c).rho0; }));
  b.push_back(real("inse", "mu", "Pa s", "dynamic viscosity", [in](RunConfig& c) -> double& { return in(c).mu; }));
  b.push_back(real("inse", "x0", "m", "domain left", [in](RunConfig& c) -> double& { return in(c).domain.x0; }));
  b.push_back(real("inse", "x1", "m", "domain right", [in](RunConfig& c) -> double& { return in(c).domain.x1; }));
  b.push_back(real("inse", "y0", "m", "domain bottom", [in](RunConfig& c) -> double& { return in(c).domain.y0; }));
  b.push_back(real("inse", "y1", "m", "domain top", [in](RunConfig& c) -> double& { return in(c).domain.y1; }));
  b.push_back(integer<Index>("inse", "nx", "-", "elements along x", [in](RunConfig& c) -> Index& { return in(c).nx; }));
  b.push_back(integer<Index>("inse", "ny", "-", "elements along y", [in](RunConfig& c) -> Index& { return in(c).ny; }));
  b.push_back(real("inse", "grading", "-", "width ratio of neighbouring elements", [in](RunConfig& c) -> double& { return in(c).grading; }));
  b.push_back(real("inse", "c1x", "m", "first monopole x", [in](RunConfig& c) -> double& { return in(c).c1[0]; }));
  b.push_back(real("inse", "c1y", "m", "first monopole y", [in](RunConfig& c) -> double& { return in(c).c1[1]; }));
  b.push_back(real("inse", "c2x", "m", "second monopole x", [in](RunConfig& c) -> double& { return in(c).c2[0]; }));
  b.push_back(real("inse", "c2y", "m", "second monopole y", [in](RunConfig& c) -> double& { return in(c).c2[1]; }));
  b.push_back(real("inse", "r0", "m", "monopole radius", [in](RunConfig& c) -> double& { return in(c).r0; }));
  b.push_back(real("inse", "omega_e", "1/s", "vorticity extremum", [in](RunConfig& c) -> double& { return in(c).omega_e; }));
  b.push_back(boolean("inse", "calibrate", "rescale omega_e to hit target_K", [in](RunConfig& c) -> bool& { return in(c).calibrate; }));
  b.push_back(real("inse", "target_K", "J", "initial kinetic energy under calibration", [in](RunConfig& c) -> double& { return in(c).target_K; }));
  b.push_back(real("inse", "dt", "s", "time step", [in](RunConfig& c) -> double& { return in(c).dt; }));
  b.push_back(real("inse", "t_final", "s", "final time", [in](RunConfig& c) -> double& { return in(c).t_final; }));
  b.push_back(boolean("inse", "freeze_modulation", "keep the initial convection operators", [in](RunConfig& c) -> bool& { return in(c).freeze_modulation; }));
  b.push_back(boolean("inse", "extrapolate_boundary", "extrapolate boundary vorticity in time", [in](RunConfig& c) -> bool& { return in(c).extrapolate_boundary; }));

  // [sweep]
  b.push_back(text("sweep", "kind", "condition | nanorod_ell | beam_dispersion",
                   [](RunConfig& c) -> std::string& { return c.sweep.kind; }));
  b.push_back({{"sweep", "ell", "m", "nonlocal lengths", "", false},
               [](RunConfig& c, const std::string& s) { c.sweep.ell = to_doubles("sweep.ell", s); },
               [](const RunConfig& c) { return fmt_list(c.sweep.ell); }});
  b.push_back({{"sweep", "nodes", "-", "node counts for the condition table", "", false},
               [](RunConfig& c, const std::string& s) {
                 c.sweep.nodes = to_list<Index>(s, [](const std::string& p) { return to_int<Index>("sweep.nodes", p); });
               },
               [](const RunConfig& c) { return fmt_list(c.sweep.nodes); }});
  b.push_back({{"sweep", "dx", "m", "beam element lengths", "", false},
               [](RunConfig& c, const std::string& s) { c.sweep.dx = to_doubles("sweep.dx", s); },
               [](const RunConfig& c) { return fmt_list(c.sweep.dx); }});
  b.push_back(integer<int>("sweep", "modes", "-", "number of beam modes",
                           [](RunConfig& c) -> int& { return c.sweep.modes; }));

  // [check]
  b.push_back(text("check", "target", "nanorod | beam | inse | all",
                   [](RunConfig& c) -> std::string& { return c.check.target; }));
  b.push_back(integer<int>("check", "random_states", "-", "INSE states for the frozen bundles",
                           [](RunConfig& c) -> int& { return c.check.random_states; }));
  b.push_back(integer<Index>("check", "inse_cells", "-", "INSE elements per side for the frozen bundles",
                             [](RunConfig& c) -> Index& { return c.check.inse_cells; }));
  b.push_back(boolean("check", "dump", "write Matrix Market files",
                      [](RunConfig& c) -> bool& { return c.check.dump; }));

  RunConfig defaults;
  for (auto& x : b) x.info.default_value = x.get(defaults);
  return b;
}

const std::vector<Binding>& bindings() {
  static const std::vector<Binding> b = make_bindings();
  return b;
}

std::string valid_keys(const std::string& section) {
  std::string s;
  for (const auto& x : bindings())
    if (x.info.section == section) s += (s.empty() ? "" : ", ") + x.info.name;
  return s;
}

const char* kModels[] = {"nanorod", "beam", "inse", "check", "sweep"};

}  // namespace

const std::vector<KeyInfo>& keys() {
  static const std::vector<KeyInfo> k = [] {
    std::vector<KeyInfo> out;
    for (const auto& x : bindings()) out.push_back(x.info);
    return out;
  }();
  return k;
}

void set_snapshots(RunConfig& c, const std::string& list) {
  c.snapshots = to_doubles("run.snapshots", list);
  std::sort(c.snapshots.begin(), c.snapshots.end());
  c.beam.snapshots = c.snapshots;
  c.inse.snapshots = c.snapshots;
}

RunConfig parse_config_text(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  std::map<std::string, const Binding*> index;
  std::vector<std::string> sections;
  for (const auto& x : bindings()) {
    index[x.info.section + "." + x.info.name] = &x;
    if (std::find(sections.begin(), sections.end(), x.info.section) == sections.end())
      sections.push_back(x.info.section);
  }
  RunConfig c;
  std::vector<std::string> seen;
  for (const auto& [sec, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError("key '" + sec + "' outside of a section");
    if (std::find(sections.begin(), sections.end(), sec) == sections.end()) {
      std::string all;
      for (const auto& s : sections) all += (all.empty() ? "" : ", ") + s;
      throw ConfigError("unknown section [" + sec + "]; valid sections: " + all);
    }
    for (const auto& [name, value] : body) {
      auto it = index.find(sec + "." + name);
      if (it == index.end())
        throw ConfigError("unknown key '" + name + "' in [" + sec + "]; valid keys: " +
                          valid_keys(sec));
      it->second->set(c, value.data());
      seen.push_back(sec + "." + name);
    }
  }
  std::string missing;
  for (const auto& x : bindings()) {
    std::string k = x.info.section + "." + x.info.name;
    if (x.info.required && std::find(seen.begin(), seen.end(), k) == seen.end())
      missing += (missing.empty() ? "" : ", ") + k;
  }
  if (!missing.empty()) throw ConfigError("missing required keys: " + missing);
  validate(c);
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void validate(RunConfig& c) {
  if (std::find(std::begin(kModels), std::end(kModels), c.model) == std::end(kModels))
    throw ConfigError("run.model must be one of nanorod, beam, inse, check, sweep (got '" +
                      c.model + "')");
  if (c.threads < 1) throw ConfigError("run.threads must be at least 1");
  if (c.out.empty()) throw ConfigError("run.out must not be empty");
  for (double s : c.snapshots)
    if (!(s >= 0.0)) throw ConfigError("run.snapshots must be non-negative");
  c.beam.snapshots = c.snapshots;
  c.inse.snapshots = c.snapshots;
  try {
    if (c.model == "nanorod") c.nanorod.to_config().validate();
    if (c.model == "beam") c.beam.validate();
    if (c.model == "inse") {
      c.inse.validate();
      if (c.inse.nx < 1 || c.inse.ny < 1) throw InvalidArgument("inse: nx and ny must be positive");
      if (!(c.inse.grading >= 1.0)) throw InvalidArgument("inse: grading must be at least 1");
      for (double s : c.snapshots)
        if (s > c.inse.t_final) throw InvalidArgument("inse: snapshot after t_final");
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (c.model == "sweep") {
    const auto& k = c.sweep.kind;
    if (k != "condition" && k != "nanorod_ell" && k != "beam_dispersion")
      throw ConfigError("sweep.kind must be condition, nanorod_ell or beam_dispersion");
    for (double l : c.sweep.ell)
      if (!(l >= 0.0)) throw ConfigError("sweep.ell values must be non-negative");
    for (Index n : c.sweep.nodes)
      if (n < 2) throw ConfigError("sweep.nodes values must be at least 2");
    for (double d : c.sweep.dx)
      if (!(d > 0.0)) throw ConfigError("sweep.dx values must be positive");
    if (c.sweep.modes < 1) throw ConfigError("sweep.modes must be positive");
  }
  if (c.model == "check") {
    const auto& t = c.check.target;
    if (t != "nanorod" && t != "beam" && t != "inse" && t != "all")
      throw ConfigError("check.target must be nanorod, beam, inse or all");
    if (c.check.random_states < 0) throw ConfigError("check.random_states must be non-negative");
    if (c.check.inse_cells < 1) throw ConfigError("check.inse_cells must be positive");
  }
}

std::string emit(const RunConfig& c) {
  std::string out, section;
  for (const auto& x : bindings()) {
    if (x.info.section != section) {
      section = x.info.section;
      out += (out.empty() ? "[" : "\n[") + section + "]\n";
    }
    out += x.info.name + " = " + x.get(c) + "\n";
  }
  return out;
}

std::string version() { return PHFEM_VERSION; }

void write_run_manifest(const std::string& dir, const RunConfig& c,
                        const std::vector<std::pair<std::string, std::string>>& extra) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(std::filesystem::path(dir) / "resolved.cfg");
    f << emit(c);
    if (!f) throw Error("cannot write resolved.cfg in " + dir);
  }
  std::ofstream f(std::filesystem::path(dir) / "versions.txt");
  f << "phfem = " << PHFEM_VERSION << "\n"
    << "compiler = " << __VERSION__ << "\n"
    << "cplusplus = " << __cplusplus << "\n"
    << "eigen = " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "." << EIGEN_MINOR_VERSION
    << "\n"
    << "umfpack = " << UMFPACK_MAIN_VERSION << "." << UMFPACK_SUB_VERSION << "."
    << UMFPACK_SUBSUB_VERSION << "\n"
    << "boost = " << BOOST_LIB_VERSION << "\n"
    << "blas = " << PHFEM_BLAS << "\n";
  for (const auto& [k, v] : extra) f << k << " = " << v << "\n";
  if (!f) throw Error("cannot write versions.txt in " + dir);
}

std::string key_table_markdown() {
  auto esc = [](std::string v) {
    for (std::size_t p = 0; (p = v.find('|', p)) != std::string::npos; p += 2) v.insert(p, "\\");
    return v;
  };
  std::string s = "| Section | Key | Unit | Default | Meaning |\n|---|---|---|---|---|\n";
  for (const auto& k : keys())
    s += "| " + k.section + " | " + k.name + (k.required ? " (required)" : "") + " | " + k.unit +
         " | " + (k.default_value.empty() ? "" : "`" + k.default_value + "`") + " | " +
         esc(k.description) + " |\n";
  return s;
}

}  // namespace phfem::cfg
