#include "pcinf/data_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <unordered_set>

namespace pcinf {

namespace {

void check_names(const std::vector<std::string>& names) {
  std::unordered_set<std::string> seen;
  for (const auto& n : names) {
    if (!seen.insert(n).second) throw std::invalid_argument("duplicate column name: " + n);
  }
}

std::vector<std::string> default_names(std::size_t p) {
  std::vector<std::string> out;
  out.reserve(p);
  for (std::size_t j = 0; j < p; ++j) out.push_back("V" + std::to_string(j + 1));
  return out;
}

}  // namespace

DataMatrix::DataMatrix(std::size_t rows, std::vector<std::string> column_names)
    : rows_(rows), names_(std::move(column_names)), values_(rows_ * names_.size(), 0.0) {
  check_names(names_);
}

DataMatrix::DataMatrix(std::size_t rows, std::vector<std::string> column_names,
                       std::vector<double> column_major_values)
    : rows_(rows), names_(std::move(column_names)), values_(std::move(column_major_values)) {
  check_names(names_);
  if (values_.size() != rows_ * names_.size()) {
    throw std::invalid_argument("DataMatrix: value count does not match shape");
  }
}

DataMatrix DataMatrix::from_rows(const std::vector<std::vector<double>>& rows,
                                 std::vector<std::string> column_names) {
  const std::size_t p = rows.empty() ? column_names.size() : rows.front().size();
  if (column_names.empty()) column_names = default_names(p);
  if (column_names.size() != p) throw std::invalid_argument("from_rows: name count mismatch");
  DataMatrix m(rows.size(), std::move(column_names));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != p) throw std::invalid_argument("from_rows: ragged rows");
    for (std::size_t j = 0; j < p; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

std::size_t DataMatrix::column_index(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw std::out_of_range("unknown column: " + std::string(name));
  return static_cast<std::size_t>(it - names_.begin());
}

const LabelColumn* DataMatrix::label(std::string_view name) const {
  for (const auto& l : labels_) {
    if (l.name == name) return &l;
  }
  return nullptr;
}

void DataMatrix::add_label(LabelColumn column) {
  if (column.values.size() != rows_) throw std::invalid_argument("label column length mismatch");
  if (label(column.name) != nullptr ||
      std::find(names_.begin(), names_.end(), column.name) != names_.end()) {
    throw std::invalid_argument("duplicate column name: " + column.name);
  }
  labels_.push_back(std::move(column));
}

bool DataMatrix::has_missing() const {
  return std::any_of(values_.begin(), values_.end(), [](double v) { return std::isnan(v); });
}

DataMatrix DataMatrix::select_rows(std::span<const std::size_t> rows) const {
  DataMatrix out(rows.size(), names_);
  for (std::size_t j = 0; j < cols(); ++j) {
    for (std::size_t r = 0; r < rows.size(); ++r) out(r, j) = (*this)(rows[r], j);
  }
  for (const auto& l : labels_) {
    LabelColumn c{l.name, {}};
    c.values.reserve(rows.size());
    for (auto r : rows) c.values.push_back(l.values[r]);
    out.labels_.push_back(std::move(c));
  }
  return out;
}

DataMatrix DataMatrix::select_columns(std::span<const std::size_t> cols) const {
  std::vector<std::string> names;
  std::vector<double> values;
  values.reserve(cols.size() * rows_);
  for (auto j : cols) {
    names.push_back(names_.at(j));
    const auto c = column(j);
    values.insert(values.end(), c.begin(), c.end());
  }
  DataMatrix out(rows_, std::move(names), std::move(values));
  out.labels_ = labels_;
  return out;
}

bool operator==(const DataMatrix& a, const DataMatrix& b) {
  if (a.rows_ != b.rows_ || a.names_ != b.names_) return false;
  // bitwise comparison so that NaN cells compare equal to themselves
  return a.values_.size() == b.values_.size() &&
         (a.values_.empty() ||
          std::memcmp(a.values_.data(), b.values_.data(), a.values_.size() * sizeof(double)) == 0);
}

}  // namespace pcinf
