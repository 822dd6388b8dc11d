#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pcinf/generators.hpp"
#include "pcinf/random.hpp"
#include "pcinf/selective.hpp"

namespace pcinf {

enum class Scenario { null_gaussian, three_clusters, contamination, intervening, robustness };

std::string_view scenario_name(Scenario s);
// Throws UsageError for an unknown name.
Scenario parse_scenario(std::string_view name);

// Which cluster comparisons each replication tests.
//   all:     every pair k < l on every variable
//   extreme: lowest- against highest-mean cluster on X1
//   random:  one pair and one variable drawn from the replication's stream
//   first:   clusters 1 and 2 on X1
enum class Comparisons { all, extreme, random, first };

std::string_view comparisons_name(Comparisons c);
Comparisons parse_comparisons(std::string_view name);

// Methods in canonical report order.
const std::vector<Method>& all_methods();

struct ScenarioConfig {
  Scenario scenario = Scenario::null_gaussian;
  std::size_t n = 200;
  std::size_t p = 2;
  double delta = 0.0;
  std::size_t k = 3;
  std::size_t n_reps = 500;
  double alpha = 0.05;
  std::size_t mc_samples = 2000;
  std::size_t dip_reps = 2000;
  std::uint64_t seed = kDefaultSeed;
  Comparisons comparisons = Comparisons::random;
  Distribution distribution = Distribution::gaussian;
  std::vector<Method> methods = all_methods();
  TTestKind ttest = TTestKind::welch;
  unsigned threads = 1;

  // Scenario defaults: designated comparisons and the shape the generator
  // imposes (p = 1 for contamination, p = 2 for three_clusters and
  // intervening).
  static ScenarioConfig defaults(Scenario s);
  // Throws UsageError naming the first invalid field.
  void validate() const;
};

// Data for replication `rep`; drawn from derive_seed(cfg.seed, rep). Only the
// matrix is returned: generating labels never reach a test.
DataMatrix generate_replicate(const ScenarioConfig& cfg, std::size_t rep);

struct ComparisonRecord {
  std::size_t replication = 0;
  int k = 0;
  int l = 0;
  std::size_t variable = 0;
  Method method = Method::direct;
  double p = 0.0;  // NaN when the test failed
  double statistic = 0.0;
  std::size_t n_preserved = 0;
  std::string error;

  bool ok() const { return error.empty(); }
};

struct MethodSummary {
  Method method = Method::direct;
  std::size_t tests = 0;
  std::size_t failures = 0;
  double rejection_rate = 0.0;
  double ks_to_uniform = 0.0;
};

struct SimulationReport {
  ScenarioConfig config;
  // ordered by replication, comparison, then canonical method order
  std::vector<ComparisonRecord> records;
  std::vector<MethodSummary> summaries;  // one per requested method
  std::size_t replication_failures = 0;
  double runtime_seconds = 0.0;

  // Successful p-values of one method in record order.
  std::vector<double> pvalues(Method m) const;
  const MethodSummary* summary(Method m) const;
};

// Sup-distance between the empirical CDF of pvals and Uniform(0, 1).
// Throws std::invalid_argument for an empty list or values outside [0, 1].
double ks_to_uniform(std::span<const double> pvals);

SimulationReport run_scenario(const ScenarioConfig& cfg);

// JSON omits the runtime so identical runs give identical bytes.
// `manifest_ref` names the run manifest kept beside the report.
std::string report_to_json(const SimulationReport& report, std::string_view manifest_ref = {});
void write_report_tsv(std::ostream& out, const SimulationReport& report);

}  // namespace pcinf
