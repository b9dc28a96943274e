#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "phfem/config.hpp"

using namespace phfem;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::string& text) {
  try {
    cfg::parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("minimal nanorod file takes the documented defaults") {
  cfg::RunConfig c = cfg::parse_config_text("[run]\nmodel = nanorod\n");
  CHECK(c.model == "nanorod");
  CHECK(c.nanorod.E == 1.0);
  CHECK(c.nanorod.rho == 10.0);
  CHECK(c.nanorod.nodes == 100);
  CHECK(c.nanorod.dt == 0.1);
  CHECK(c.nanorod.t_final == 10.0);
  CHECK(c.threads == 1);
  nanorod::Config nc = c.nanorod.to_config();
  CHECK(nc.v0(0.3) == doctest::Approx(1.0));
  CHECK(nc.rho(0.7) == 10.0);
}

TEST_CASE("values, comments and lists") {
  cfg::RunConfig c = cfg::parse_config_text(
      "; comment\n[run]\nmodel = beam\nsnapshots = 0.005, 0.001\n# other\n"
      "[beam]\ndx = 1e-3\nimplicit = false\n");
  CHECK(c.beam.dx == 1e-3);
  CHECK_FALSE(c.beam.implicit);
  CHECK(c.snapshots == std::vector<double>{0.001, 0.005});
  CHECK(c.beam.snapshots == c.snapshots);
}

TEST_CASE("empty file names the required keys") {
  std::string e = error_of("");
  CHECK(e.find("missing required keys") != std::string::npos);
  CHECK(e.find("run.model") != std::string::npos);
}

TEST_CASE("unknown keys and sections list the valid ones") {
  std::string e = error_of("[run]\nmodel = nanorod\n[nanorod]\nyoung = 3\n");
  CHECK(e.find("unknown key 'young'") != std::string::npos);
  CHECK(e.find("valid keys") != std::string::npos);
  CHECK(e.find("rho") != std::string::npos);
  e = error_of("[run]\nmodel = nanorod\n[plate]\nE = 3\n");
  CHECK(e.find("unknown section [plate]") != std::string::npos);
  CHECK(e.find("inse") != std::string::npos);
}

TEST_CASE("malformed values and range violations") {
  CHECK(error_of("[run]\nmodel = nanorod\n[nanorod]\nE = abc\n").find("cannot read") !=
        std::string::npos);
  CHECK(error_of("[run]\nmodel = nanorod\n[nanorod]\nnodes = 3.5\n") != "");
  CHECK(error_of("[run]\nmodel = beam\n[beam]\nimplicit = maybe\n") != "");
  CHECK(error_of("[run]\nmodel = nanorod\n[nanorod]\nE = -1\n") != "");
  CHECK(error_of("[run]\nmodel = plate\n").find("run.model") != std::string::npos);
  CHECK(error_of("[run]\nmodel = inse\n[inse]\ngrading = 0.5\n") != "");
  CHECK(error_of("[run]\nmodel = sweep\n[sweep]\nkind = modes\n") != "");
  CHECK(error_of("[run]\nmodel = nanorod\nthreads = 0\n") != "");
  CHECK(error_of("[run\nmodel = nanorod\n") != "");
  CHECK_THROWS_AS(cfg::parse_config("/nonexistent/phfem.cfg"), ConfigError);
}

TEST_CASE("emitted text parses back to the same configuration") {
  cfg::RunConfig c = cfg::parse_config_text("[run]\nmodel = inse\n");
  c.inse.dt = 1.0 / 600.0;
  c.inse.grading = 1.1;
  c.inse.c1 = {0.1 / 3.0, 0.1};
  c.beam.nu = 0.29;
  c.sweep.ell = {0.0, 1.0 / 7.0};
  c.sweep.nodes = {11, 13};
  c.seed = 987654321987ULL;
  cfg::set_snapshots(c, "0.5,0.25");
  CHECK(c.inse.snapshots == std::vector<double>{0.25, 0.5});
  cfg::RunConfig back = cfg::parse_config_text(cfg::emit(c));
  CHECK(back == c);
  CHECK(cfg::emit(back) == cfg::emit(c));
}

TEST_CASE("key table and manifest") {
  for (const auto& k : cfg::keys()) {
    CHECK_FALSE(k.section.empty());
    CHECK_FALSE(k.description.empty());
  }
  std::string md = cfg::key_table_markdown();
  CHECK(md.find("| run | model (required) |") != std::string::npos);
  fs::path dir = fs::temp_directory_path() / "phfem_manifest_test";
  fs::remove_all(dir);
  cfg::RunConfig c = cfg::parse_config_text("[run]\nmodel = nanorod\n");
  cfg::write_run_manifest(dir.string(), c, {{"command", "nanorod"}});
  CHECK(cfg::parse_config((dir / "resolved.cfg").string()) == c);
  std::ifstream v(dir / "versions.txt");
  std::string all((std::istreambuf_iterator<char>(v)), {});
  CHECK(all.find("phfem = " + cfg::version()) != std::string::npos);
  CHECK(all.find("command = nanorod") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("shipped configurations parse") {
  int n = 0;
  for (const auto& e : fs::directory_iterator(PHFEM_CONFIG_DIR)) {
    if (e.path().extension() != ".cfg") continue;
    CAPTURE(e.path().string());
    CHECK_NOTHROW(cfg::parse_config(e.path().string()));
    ++n;
  }
  CHECK(n >= 8);
  cfg::RunConfig bench = cfg::parse_config(std::string(PHFEM_CONFIG_DIR) + "/inse_bench.cfg");
  CHECK(bench.inse.nx == 96);
  CHECK(bench.inse.grading == 1.0);
  CHECK(bench.snapshots.size() == 3);
}

}
