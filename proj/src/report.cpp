#include "pcinf/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <tuple>

#include "pcinf/error.hpp"

namespace pcinf {

namespace {

double number_or_nan(const nlohmann::json& v) {
  return v.is_number() ? v.get<double>() : std::numeric_limits<double>::quiet_NaN();
}

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

PowerTable merge_reports(const std::vector<nlohmann::json>& reports) {
  if (reports.empty()) throw UsageError("no reports given");
  PowerTable table;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    if (!r.is_object() || r.value("schema", "") != "pcinf.simulation/1" || !r.contains("config") ||
        !r.contains("summary")) {
      throw DataError("report " + std::to_string(i + 1) + " is not a simulation report");
    }
    const auto& cfg = r.at("config");
    const std::string scenario = cfg.at("scenario").get<std::string>();
    std::vector<std::string> methods;
    for (const auto& s : r.at("summary")) methods.push_back(s.at("method").get<std::string>());
    if (i == 0) {
      table.scenario = scenario;
      table.methods = methods;
    } else if (scenario != table.scenario) {
      throw DataError("incompatible scenarios: '" + table.scenario + "' and '" + scenario + "'");
    } else if (methods != table.methods) {
      throw DataError("incompatible method lists across reports");
    }
    PowerRow row;
    row.scenario = scenario;
    row.n = cfg.at("n").get<std::size_t>();
    row.k = cfg.at("k").get<std::size_t>();
    row.delta = cfg.at("delta").get<double>();
    row.reps = cfg.at("reps").get<std::size_t>();
    for (const auto& s : r.at("summary")) {
      row.rejection_rate.push_back(number_or_nan(s.at("rejection_rate")));
      row.ks_to_uniform.push_back(number_or_nan(s.at("ks_to_uniform")));
    }
    table.rows.push_back(std::move(row));
  }
  std::stable_sort(table.rows.begin(), table.rows.end(), [](const PowerRow& a, const PowerRow& b) {
    return std::tie(a.delta, a.k, a.n) < std::tie(b.delta, b.k, b.n);
  });
  return table;
}

void write_power_tsv(std::ostream& out, const PowerTable& table) {
  out << "scenario\tn\tk\tdelta\treps";
  for (const auto& m : table.methods) out << '\t' << m;
  out << '\n';
  for (const auto& row : table.rows) {
    out << row.scenario << '\t' << row.n << '\t' << row.k << '\t' << format_number(row.delta) << '\t' << row.reps;
    for (double v : row.rejection_rate) out << '\t' << format_number(v);
    out << '\n';
  }
}

std::string power_to_json(const PowerTable& table) {
  nlohmann::ordered_json j;
  j["schema"] = "pcinf.power/1";
  j["scenario"] = table.scenario;
  j["methods"] = table.methods;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json rates = nlohmann::ordered_json::object();
    nlohmann::ordered_json ks = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < table.methods.size(); ++i) {
      const double r = row.rejection_rate[i], d = row.ks_to_uniform[i];
      rates[table.methods[i]] = std::isnan(r) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r);
      ks[table.methods[i]] = std::isnan(d) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(d);
    }
    rows.push_back({{"n", row.n},
                    {"k", row.k},
                    {"delta", row.delta},
                    {"reps", row.reps},
                    {"rejection_rate", rates},
                    {"ks_to_uniform", ks}});
  }
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

}  // namespace pcinf
