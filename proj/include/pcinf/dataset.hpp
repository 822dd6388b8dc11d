#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "pcinf/data_matrix.hpp"

namespace pcinf {

struct CsvOptions {
  char delimiter = ',';
  bool header = true;
  // Numeric columns to load, by name. Empty selects every column whose
  // non-missing cells all parse as numbers. Columns not selected are kept
  // as string label columns.
  std::vector<std::string> columns;
};

// Empty cells and "NA"/"NaN" (any case) are missing values.
bool is_missing_token(std::string_view cell);

DataMatrix load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
DataMatrix parse_csv(std::istream& in, const CsvOptions& options = {});

// Writes numeric columns then label columns; doubles at round-trip precision.
void write_csv(std::ostream& out, const DataMatrix& m, char delimiter = ',');

// Keeps rows without any missing numeric or label cell, in original order.
// Throws DataError when fewer than two rows remain.
DataMatrix drop_incomplete_rows(const DataMatrix& m);

// Centres each column and scales it to unit sample standard deviation
// (n - 1 denominator). Throws DataError naming any constant column.
DataMatrix zscale(const DataMatrix& m);

// Keeps rows whose label column `name` equals `value` for every filter.
DataMatrix filter_rows(const DataMatrix& m,
                       const std::vector<std::pair<std::string, std::string>>& where);

}  // namespace pcinf
