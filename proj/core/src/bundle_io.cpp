#include "phfem/bundle_io.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <utility>
#include <vector>

#include "phfem/matrix_market.hpp"

namespace phfem {

namespace {

std::vector<std::pair<std::string, SparseMatrix PHSystemBundle::*>> blocks() {
  return {{"P", &PHSystemBundle::P},   {"S", &PHSystemBundle::S},
          {"J", &PHSystemBundle::J},   {"R", &PHSystemBundle::R},
          {"M_weight", &PHSystemBundle::M_weight}, {"B_D", &PHSystemBundle::B_D},
          {"B_L", &PHSystemBundle::B_L}};
}

}  // namespace

void write_bundle(const std::string& dir, const PHSystemBundle& b) {
  std::ofstream man(dir + "/manifest.txt");
  if (!man) throw Error("cannot write bundle manifest in " + dir);
  man << "n = " << b.n << "\nn_L = " << b.n_L << "\nn_D = " << b.n_D << "\nr = " << b.r << '\n';
  std::string names;
  for (const auto& [name, member] : blocks()) {
    const SparseMatrix& m = b.*member;
    if (m.empty()) continue;
    write_matrix_market(dir + "/" + name + ".mtx", m);
    names += (names.empty() ? "" : ",") + name;
  }
  man << "blocks = " << names << '\n';
}

PHSystemBundle read_bundle(const std::string& dir) {
  std::ifstream man(dir + "/manifest.txt");
  if (!man) throw Error("cannot read bundle manifest in " + dir);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(man, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  PHSystemBundle b;
  try {
    b.n = std::stol(kv.at("n"));
    b.n_L = std::stol(kv.at("n_L"));
    b.n_D = std::stol(kv.at("n_D"));
    b.r = std::stol(kv.at("r"));
  } catch (const std::exception&) {
    throw InvalidArgument("bundle manifest in " + dir + " lacks dimension labels");
  }
  std::istringstream names(kv["blocks"]);
  std::string name;
  while (std::getline(names, name, ',')) {
    bool known = false;
    for (const auto& [bn, member] : blocks())
      if (bn == name) {
        b.*member = read_matrix_market(dir + "/" + name + ".mtx");
        known = true;
      }
    if (!known) throw InvalidArgument("bundle manifest names unknown block '" + name + "'");
  }
  b.check_dimensions();
  return b;
}

}  // namespace phfem
