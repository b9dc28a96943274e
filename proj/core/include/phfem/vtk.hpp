#pragma once

#include <string>
#include <utility>
#include <vector>

#include "phfem/sparse.hpp"

namespace phfem {

/// Legacy ASCII VTK structured grid (z = 0) with point scalars. Point (i, j)
/// sits at (x[i], y[j]) and field values are stored with i fastest.
void write_vtk_structured(const std::string& path, const std::vector<double>& x,
                          const std::vector<double>& y,
                          const std::vector<std::pair<std::string, Vector>>& fields,
                          const std::string& title = "phfem");

}  // namespace phfem
