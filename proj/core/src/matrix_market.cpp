#include "phfem/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <locale>
#include <sstream>

namespace phfem {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

void write_matrix_market(std::ostream& os, const SparseMatrix& a, MatrixMarketSymmetry sym) {
  std::ostringstream body;
  body.imbue(std::locale::classic());
  body.precision(17);
  auto ro = a.row_offsets();
  auto ci = a.col_indices();
  auto va = a.values();
  Index count = 0;
  for (Index i = 0; i < a.rows(); ++i)
    for (int p = ro[i]; p < ro[i + 1]; ++p) {
      if (sym == MatrixMarketSymmetry::Symmetric && ci[p] > i) continue;
      body << (i + 1) << ' ' << (ci[p] + 1) << ' ' << va[p] << '\n';
      ++count;
    }
  os << "%%MatrixMarket matrix coordinate real "
     << (sym == MatrixMarketSymmetry::Symmetric ? "symmetric" : "general") << '\n';
  os << a.rows() << ' ' << a.cols() << ' ' << count << '\n' << body.str();
}

void write_matrix_market(const std::string& path, const SparseMatrix& a,
                         MatrixMarketSymmetry sym) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open " + path + " for writing");
  write_matrix_market(f, a, sym);
  if (!f) throw Error("write failed: " + path);
}

SparseMatrix read_matrix_market(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("matrix market: empty stream");
  std::istringstream hs(lower(line));
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%matrixmarket" || object != "matrix" || format != "coordinate")
    throw InvalidArgument("matrix market: unsupported header '" + line + "'");
  if (field != "real" && field != "integer")
    throw InvalidArgument("matrix market: unsupported field '" + field + "'");
  bool symmetric = symmetry == "symmetric";
  if (!symmetric && symmetry != "general")
    throw InvalidArgument("matrix market: unsupported symmetry '" + symmetry + "'");

  while (std::getline(is, line))
    if (!line.empty() && line[0] != '%') break;
  std::istringstream ss(line);
  ss.imbue(std::locale::classic());
  Index rows = 0, cols = 0, nnz = 0;
  if (!(ss >> rows >> cols >> nnz)) throw InvalidArgument("matrix market: bad size line");

  TripletBuilder tb(rows, cols);
  tb.reserve(static_cast<std::size_t>(symmetric ? 2 * nnz : nnz));
  is.imbue(std::locale::classic());
  for (Index k = 0; k < nnz; ++k) {
    Index i = 0, j = 0;
    double v = 0.0;
    if (!(is >> i >> j >> v)) throw InvalidArgument("matrix market: truncated entry list");
    tb.add(i - 1, j - 1, v);
    if (symmetric && i != j) tb.add(j - 1, i - 1, v);
  }
  return tb.build();
}

SparseMatrix read_matrix_market(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  return read_matrix_market(f);
}

}  // namespace phfem
