#pragma once

// Minimal CSV tables. Numbers are written with 17 significant digits so
// that a value read back is bit-identical.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparseobs/analysis.hpp"

namespace sparseobs {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// %.17g, with "nan", "inf" and "-inf" for non-finite values.
std::string format_number(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  /// Throws DimensionError when the row length differs from the header.
  void add_row(std::vector<std::string> row);
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Parses text produced by CsvTable::str() (no quoting support).
CsvTable parse_csv(const std::string& text);

/// Columns time, e_1..e_Nx, eps_1..eps_Nz.
CsvTable simulation_table(const SimulationRun& run);

/// Writes through a temporary file and a rename; throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace sparseobs
