#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace pcinf {

// One simulation report reduced to its configuration and per-method rates.
struct PowerRow {
  std::string scenario;
  std::size_t n = 0;
  std::size_t k = 0;
  double delta = 0.0;
  std::size_t reps = 0;
  std::vector<double> rejection_rate;  // aligned with PowerTable::methods
  std::vector<double> ks_to_uniform;
};

struct PowerTable {
  std::string scenario;
  std::vector<std::string> methods;
  std::vector<PowerRow> rows;  // ascending by (delta, k, n), ties in input order
};

// Combines parsed simulation reports of one scenario. Throws UsageError for
// an empty list and DataError for a foreign schema, mixed scenarios
// ("incompatible scenarios") or differing method lists.
PowerTable merge_reports(const std::vector<nlohmann::json>& reports);

void write_power_tsv(std::ostream& out, const PowerTable& table);
std::string power_to_json(const PowerTable& table);

}  // namespace pcinf
