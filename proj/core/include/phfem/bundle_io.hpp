#pragma once

#include <string>

#include "phfem/structures.hpp"

namespace phfem {

/// Writes each nonempty block as <dir>/<name>.mtx plus a manifest.txt with
/// the dimension labels and block names. The directory must exist.
void write_bundle(const std::string& dir, const PHSystemBundle& b);
PHSystemBundle read_bundle(const std::string& dir);

}  // namespace phfem
