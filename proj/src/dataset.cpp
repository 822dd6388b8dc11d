#include "pcinf/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "pcinf/error.hpp"

namespace pcinf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Splits one CSV record. Double-quoted fields may contain the delimiter and
// "" escapes; embedded newlines are not supported.
std::vector<std::string> split_record(std::string_view line, char delim) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      fields.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.emplace_back(trim(cur));
  return fields;
}

std::optional<double> parse_number(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
  return v;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

bool is_missing_token(std::string_view cell) {
  cell = trim(cell);
  return cell.empty() || iequals(cell, "NA") || iequals(cell, "NaN");
}

DataMatrix parse_csv(std::istream& in, const CsvOptions& options) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> header;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
      line.erase(0, 3);
    }
    if (trim(line).empty()) continue;
    auto fields = split_record(line, options.delimiter);
    if (options.header && header.empty()) {
      header = std::move(fields);
      continue;
    }
    const std::size_t expected = header.empty() ? (records.empty() ? fields.size() : records.front().size())
                                                : header.size();
    if (fields.size() != expected) {
      throw DataError("ragged row at line " + std::to_string(line_no) + ": expected " +
                      std::to_string(expected) + " fields, got " + std::to_string(fields.size()));
    }
    records.push_back(std::move(fields));
  }
  if (records.empty()) throw DataError("no observations");

  const std::size_t width = records.front().size();
  if (header.empty()) {
    for (std::size_t j = 0; j < width; ++j) header.push_back("V" + std::to_string(j + 1));
  }

  auto column_is_numeric = [&](std::size_t j) {
    return std::all_of(records.begin(), records.end(), [&](const auto& r) {
      return is_missing_token(r[j]) || parse_number(r[j]).has_value();
    });
  };

  std::vector<std::size_t> numeric;
  if (options.columns.empty()) {
    for (std::size_t j = 0; j < width; ++j) {
      if (column_is_numeric(j)) numeric.push_back(j);
    }
    if (numeric.empty()) throw DataError("no numeric columns");
  } else {
    for (const auto& name : options.columns) {
      const auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) throw DataError("unknown column: " + name);
      numeric.push_back(static_cast<std::size_t>(it - header.begin()));
    }
  }

  const std::size_t n = records.size();
  std::vector<std::string> names;
  std::vector<double> values;
  values.reserve(n * numeric.size());
  for (auto j : numeric) {
    names.push_back(header[j]);
    for (std::size_t i = 0; i < n; ++i) {
      const std::string& cell = records[i][j];
      if (is_missing_token(cell)) {
        values.push_back(kNaN);
        continue;
      }
      const auto v = parse_number(cell);
      if (!v) {
        throw DataError("non-numeric cell '" + cell + "' in column " + header[j] + ", row " +
                        std::to_string(i + 1));
      }
      values.push_back(*v);
    }
  }
  DataMatrix m(n, std::move(names), std::move(values));
  for (std::size_t j = 0; j < width; ++j) {
    if (std::find(numeric.begin(), numeric.end(), j) != numeric.end()) continue;
    LabelColumn col{header[j], {}};
    col.values.reserve(n);
    for (const auto& r : records) {
      if (is_missing_token(r[j])) {
        col.values.emplace_back(std::nullopt);
      } else {
        col.values.emplace_back(r[j]);
      }
    }
    m.add_label(std::move(col));
  }
  return m;
}

DataMatrix load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read file: " + path.string());
  return parse_csv(in, options);
}

void write_csv(std::ostream& out, const DataMatrix& m, char delimiter) {
  bool first = true;
  auto sep = [&] {
    if (!first) out << delimiter;
    first = false;
  };
  for (const auto& name : m.column_names()) {
    sep();
    out << name;
  }
  for (const auto& l : m.labels()) {
    sep();
    out << l.name;
  }
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    first = true;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      sep();
      const double v = m(i, j);
      if (std::isnan(v)) {
        out << "NA";
      } else {
        const auto res = std::to_chars(buf, buf + sizeof(buf), v);
        out.write(buf, res.ptr - buf);
      }
    }
    for (const auto& l : m.labels()) {
      sep();
      out << (l.values[i] ? *l.values[i] : std::string("NA"));
    }
    out << '\n';
  }
}

DataMatrix drop_incomplete_rows(const DataMatrix& m) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    bool complete = true;
    for (std::size_t j = 0; j < m.cols() && complete; ++j) complete = !std::isnan(m(i, j));
    for (const auto& l : m.labels()) complete = complete && l.values[i].has_value();
    if (complete) keep.push_back(i);
  }
  if (keep.size() < 2) throw DataError("insufficient complete observations");
  return m.select_rows(keep);
}

DataMatrix zscale(const DataMatrix& m) {
  DataMatrix out = m;
  const auto n = static_cast<double>(m.rows());
  if (m.rows() < 2) throw DataError("zscale needs at least two rows");
  for (std::size_t j = 0; j < m.cols(); ++j) {
    auto col = out.column(j);
    double mean = 0.0;
    for (double v : col) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : col) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    if (!(sd > 0.0) || !std::isfinite(sd)) {
      throw DataError("column '" + m.column_names()[j] + "' has zero or undefined standard deviation");
    }
    for (double& v : col) v = (v - mean) / sd;
  }
  return out;
}

DataMatrix filter_rows(const DataMatrix& m,
                       const std::vector<std::pair<std::string, std::string>>& where) {
  std::vector<const LabelColumn*> cols;
  for (const auto& [name, value] : where) {
    const LabelColumn* c = m.label(name);
    if (c == nullptr) throw DataError("unknown label column: " + name);
    cols.push_back(c);
  }
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    bool ok = true;
    for (std::size_t f = 0; f < where.size() && ok; ++f) {
      ok = cols[f]->values[i].has_value() && *cols[f]->values[i] == where[f].second;
    }
    if (ok) keep.push_back(i);
  }
  return m.select_rows(keep);
}

}  // namespace pcinf
