#include "phfem/csv.hpp"

#include <locale>
#include <sstream>

#include "phfem/errors.hpp"

namespace phfem {

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path), cols_(header.size()) {
  if (!out_) throw Error("cannot open " + path + " for writing");
  out_.imbue(std::locale::classic());
  out_.precision(17);
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(std::initializer_list<double> values) {
  row(std::vector<double>(values));
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != cols_) throw DimensionError("CsvWriter: row width != header width");
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << values[i];
  out_ << '\n';
  if (!out_) throw Error("CsvWriter: write failed");
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw InvalidArgument("csv: no column '" + name + "'");
}

std::vector<double> CsvTable::values(const std::string& name) const {
  std::size_t c = column(name);
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(r[c]);
  return v;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("csv: empty file " + path);
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    ss.imbue(std::locale::classic());
    std::vector<double> r;
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::istringstream cs(cell);
      cs.imbue(std::locale::classic());
      double v;
      if (!(cs >> v)) throw InvalidArgument("csv: bad number '" + cell + "' on line " +
                                             std::to_string(lineno));
      r.push_back(v);
    }
    if (r.size() != t.header.size())
      throw InvalidArgument("csv: line " + std::to_string(lineno) + " has " +
                            std::to_string(r.size()) + " fields, expected " +
                            std::to_string(t.header.size()));
    t.rows.push_back(std::move(r));
  }
  return t;
}

}  // namespace phfem
