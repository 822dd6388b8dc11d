#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pcinf {

// A non-numeric column kept alongside the matrix (e.g. species, sex).
// Missing cells are std::nullopt.
struct LabelColumn {
  std::string name;
  std::vector<std::optional<std::string>> values;
};

// n x p table of reals, stored column-major so that a single variable is a
// contiguous span. Missing values are quiet NaNs.
class DataMatrix {
 public:
  DataMatrix() = default;
  DataMatrix(std::size_t rows, std::vector<std::string> column_names);
  DataMatrix(std::size_t rows, std::vector<std::string> column_names,
             std::vector<double> column_major_values);

  static DataMatrix from_rows(const std::vector<std::vector<double>>& rows,
                              std::vector<std::string> column_names = {});

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return names_.size(); }

  double operator()(std::size_t i, std::size_t j) const { return values_[j * rows_ + i]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[j * rows_ + i]; }

  std::span<const double> column(std::size_t j) const {
    return {values_.data() + j * rows_, rows_};
  }
  std::span<double> column(std::size_t j) { return {values_.data() + j * rows_, rows_}; }
  std::span<const double> values() const { return values_; }

  const std::vector<std::string>& column_names() const { return names_; }
  // Throws std::out_of_range for an unknown name.
  std::size_t column_index(std::string_view name) const;

  const std::vector<LabelColumn>& labels() const { return labels_; }
  const LabelColumn* label(std::string_view name) const;
  void add_label(LabelColumn column);

  bool has_missing() const;

  // Rows in the given order; label columns follow along.
  DataMatrix select_rows(std::span<const std::size_t> rows) const;
  DataMatrix select_columns(std::span<const std::size_t> cols) const;

  friend bool operator==(const DataMatrix&, const DataMatrix&);

 private:
  std::size_t rows_ = 0;
  std::vector<std::string> names_;
  std::vector<double> values_;
  std::vector<LabelColumn> labels_;
};

}  // namespace pcinf
