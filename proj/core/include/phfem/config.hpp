#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "phfem/beam.hpp"
#include "phfem/inse.hpp"
#include "phfem/nanorod.hpp"

namespace phfem::cfg {

/// Scalar description of the nanorod run. Density is constant and the
/// initial velocity is amplitude * exp(-width (x - center)^2).
struct NanorodParams {
  double E = 1.0;             // Pa
  double rho = 10.0;          // kg/m
  double ell = 0.0;           // m
  double a = 0.0, b = 1.0;    // m
  Index nodes = 100;
  double v0_amplitude = 1.0;  // m/s
  double v0_center = 0.3;     // m
  double v0_width = 80.0;     // 1/m^2
  double dt = 0.1;            // s
  double t_final = 10.0;      // s

  nanorod::Config to_config() const;
  bool operator==(const NanorodParams&) const = default;
};

struct SweepParams {
  /// condition: kappa(M + l^2 K + l B B^T) table.
  /// nanorod_ell: one nanorod run per ell value.
  /// beam_dispersion: phase velocity table at each dx.
  std::string kind = "condition";
  std::vector<double> ell{0.0, 1e-3, 1e-2, 5e-2};
  std::vector<Index> nodes{100, 500, 1000};
  std::vector<double> dx{5e-4};
  int modes = 10;
  bool operator==(const SweepParams&) const = default;
};

struct CheckParams {
  std::string target = "all";  // nanorod | beam | inse | all
  int random_states = 10;
  Index inse_cells = 8;        // INSE mesh for the frozen bundles
  bool dump = true;            // Matrix Market files of every block
  bool operator==(const CheckParams&) const = default;
};

struct RunConfig {
  std::string model;               // nanorod | beam | inse | check | sweep
  std::string out = "out";
  std::vector<double> snapshots;   // s, copied into the beam and INSE configs
  std::uint64_t seed = 1;
  int threads = 1;

  NanorodParams nanorod;
  beam::Config beam;
  inse::Config inse;
  SweepParams sweep;
  CheckParams check;

  bool operator==(const RunConfig&) const = default;
};

struct KeyInfo {
  std::string section, name, unit, description, default_value;
  bool required = false;
};

/// Every accepted key in emission order.
const std::vector<KeyInfo>& keys();

/// Flat INI: `[section]` headers and `key = value` lines, `;` or `#`
/// comments. Unknown sections or keys, malformed values, missing required
/// keys and range violations throw ConfigError.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

/// Complete INI text with every key; parse_config_text(emit(c)) == c.
std::string emit(const RunConfig& c);

/// Range and consistency checks; throws ConfigError.
void validate(RunConfig& c);

/// Applies a comma separated time list to the run and both model configs.
void set_snapshots(RunConfig& c, const std::string& list);

std::string version();

/// Writes resolved.cfg and versions.txt into `dir` (created if missing).
void write_run_manifest(const std::string& dir, const RunConfig& c,
                        const std::vector<std::pair<std::string, std::string>>& extra = {});

/// Markdown table of keys(), used for the README.
std::string key_table_markdown();

}  // namespace phfem::cfg
