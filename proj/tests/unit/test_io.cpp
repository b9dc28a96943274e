#include <doctest.h>

#include <clocale>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "phfem/csv.hpp"
#include "phfem/errors.hpp"
#include "phfem/vtk.hpp"

using namespace phfem;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("CSV round trip keeps every bit") {
  fs::path p = fs::temp_directory_path() / "phfem_io_test.csv";
  const double third = 1.0 / 3.0, tiny = 4.9e-324;
  {
    CsvWriter w(p.string(), {"a", "b"});
    w.row({third, -tiny});
    w.row(std::vector<double>{1e300, 0.1});
    CHECK_THROWS_AS(w.row({1.0}), DimensionError);
  }
  CsvTable t = read_csv(p.string());
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][0] == third);
  CHECK(t.rows[0][1] == -tiny);
  CHECK(t.values("b")[1] == 0.1);
  CHECK_THROWS_AS(t.column("c"), InvalidArgument);
  CHECK(slurp(p).find(',') != std::string::npos);
  fs::remove(p);
}

TEST_CASE("CSV ignores the global locale") {
  // Only meaningful where a comma-decimal locale is installed.
  const char* old = std::setlocale(LC_NUMERIC, nullptr);
  std::string saved = old ? old : "C";
  if (std::setlocale(LC_NUMERIC, "de_DE.UTF-8")) {
    fs::path p = fs::temp_directory_path() / "phfem_io_locale.csv";
    {
      CsvWriter w(p.string(), {"x"});
      w.row({0.5});
    }
    CHECK(slurp(p) == "x\n0.5\n");
    fs::remove(p);
  }
  std::setlocale(LC_NUMERIC, saved.c_str());
}

TEST_CASE("VTK structured grid layout") {
  fs::path p = fs::temp_directory_path() / "phfem_io_test.vtk";
  Vector f(6);
  f << 0, 1, 2, 3, 4, 5;
  write_vtk_structured(p.string(), {0.0, 0.5, 1.0}, {0.0, 2.0}, {{"omega", f}});
  std::string s = slurp(p);
  CHECK(s.rfind("# vtk DataFile Version", 0) == 0);
  CHECK(s.find("DATASET STRUCTURED_GRID") != std::string::npos);
  CHECK(s.find("DIMENSIONS 3 2 1") != std::string::npos);
  CHECK(s.find("POINTS 6") != std::string::npos);
  CHECK(s.find("POINT_DATA 6") != std::string::npos);
  CHECK(s.find("SCALARS omega double") != std::string::npos);
  CHECK_THROWS_AS(write_vtk_structured(p.string(), {0.0, 1.0}, {0.0}, {{"omega", f}}),
                  DimensionError);
  fs::remove(p);
}

}
