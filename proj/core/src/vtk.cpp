#include "phfem/vtk.hpp"

#include <fstream>
#include <locale>

namespace phfem {

void write_vtk_structured(const std::string& path, const std::vector<double>& x,
                          const std::vector<double>& y,
                          const std::vector<std::pair<std::string, Vector>>& fields,
                          const std::string& title) {
  const std::size_t n = x.size() * y.size();
  for (const auto& [name, v] : fields)
    if (static_cast<std::size_t>(v.size()) != n)
      throw DimensionError("write_vtk_structured: field '" + name + "' has wrong length");
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out.imbue(std::locale::classic());
  out.precision(17);
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET STRUCTURED_GRID\n";
  out << "DIMENSIONS " << x.size() << ' ' << y.size() << " 1\n";
  out << "POINTS " << n << " double\n";
  for (double yj : y)
    for (double xi : x) out << xi << ' ' << yj << " 0\n";
  out << "POINT_DATA " << n << '\n';
  for (const auto& [name, v] : fields) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (Index k = 0; k < v.size(); ++k) out << v[k] << '\n';
  }
  if (!out) throw Error("write_vtk_structured: write failed for " + path);
}

}  // namespace phfem
