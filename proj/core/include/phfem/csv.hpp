#pragma once

#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace phfem {

/// Numeric CSV with '.' decimals and 17 significant digits regardless of
/// the global locale.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(std::initializer_list<double> values);
  void row(const std::vector<double>& values);

 private:
  std::ofstream out_;
  std::size_t cols_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  /// Index of a named column; throws InvalidArgument when missing.
  std::size_t column(const std::string& name) const;
  std::vector<double> values(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

}  // namespace phfem
