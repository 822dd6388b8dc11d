#include "pcinf/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <tuple>

#include <json.hpp>

#include "pcinf/clusterer.hpp"
#include "pcinf/clustering.hpp"
#include "pcinf/dip.hpp"
#include "pcinf/error.hpp"
#include "pcinf/merging.hpp"
#include "pcinf/parallel.hpp"

namespace pcinf {

std::string_view scenario_name(Scenario s) {
  switch (s) {
    case Scenario::null_gaussian: return "null_gaussian";
    case Scenario::three_clusters: return "three_clusters";
    case Scenario::contamination: return "contamination";
    case Scenario::intervening: return "intervening";
    case Scenario::robustness: return "robustness";
  }
  return "unknown";
}

Scenario parse_scenario(std::string_view name) {
  for (Scenario s : {Scenario::null_gaussian, Scenario::three_clusters, Scenario::contamination,
                     Scenario::intervening, Scenario::robustness}) {
    if (scenario_name(s) == name) return s;
  }
  throw UsageError("unknown scenario '" + std::string(name) + "'");
}

std::string_view comparisons_name(Comparisons c) {
  switch (c) {
    case Comparisons::all: return "all";
    case Comparisons::extreme: return "extreme";
    case Comparisons::random: return "random";
    case Comparisons::first: return "first";
  }
  return "unknown";
}

Comparisons parse_comparisons(std::string_view name) {
  for (Comparisons c : {Comparisons::all, Comparisons::extreme, Comparisons::random, Comparisons::first}) {
    if (comparisons_name(c) == name) return c;
  }
  throw UsageError("unknown comparison set '" + std::string(name) + "'");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> all = {Method::direct, Method::merged, Method::dip, Method::ttest};
  return all;
}

ScenarioConfig ScenarioConfig::defaults(Scenario s) {
  ScenarioConfig c;
  c.scenario = s;
  switch (s) {
    case Scenario::null_gaussian:
    case Scenario::robustness:
      c.p = 2;
      c.k = 3;
      c.comparisons = Comparisons::random;
      break;
    case Scenario::three_clusters:
      c.n = 150;
      c.p = 2;
      c.k = 3;
      c.comparisons = Comparisons::all;
      break;
    case Scenario::contamination:
      c.p = 1;
      c.k = 2;
      c.delta = 4.0;
      c.comparisons = Comparisons::extreme;
      c.mc_samples = 1000;
      break;
    case Scenario::intervening:
      c.n = 150;
      c.p = 2;
      c.k = 3;
      c.delta = 6.0;
      c.comparisons = Comparisons::extreme;
      c.mc_samples = 1000;
      break;
  }
  return c;
}

void ScenarioConfig::validate() const {
  if (n_reps < 1) throw UsageError("reps must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw UsageError("delta must be finite and >= 0");
  if (k < 2) throw UsageError("need at least two clusters");
  if (mc_samples < 1) throw UsageError("mc-samples must be at least 1");
  if (dip_reps < 1) throw UsageError("dip-reps must be at least 1");
  if (methods.empty()) throw UsageError("no methods requested");
  if (p < 1) throw UsageError("p must be at least 1");
  if (scenario == Scenario::contamination && p != 1) throw UsageError("contamination data are univariate (p = 1)");
  if ((scenario == Scenario::three_clusters || scenario == Scenario::intervening) && p != 2) {
    throw UsageError(std::string(scenario_name(scenario)) + " data are bivariate (p = 2)");
  }
  const std::size_t rows = scenario == Scenario::three_clusters ? 3 * (n / 3) : n;
  if (rows < k) throw UsageError("n must be at least K");
}

namespace {

std::uint64_t replicate_seed(const ScenarioConfig& cfg, std::size_t rep) { return derive_seed(cfg.seed, rep); }

std::uint64_t dip_calibration_seed(std::uint64_t master) {
  return derive_seed(master, std::numeric_limits<std::uint64_t>::max());
}

struct Comparison {
  int k;
  int l;
  std::size_t g;
};

std::vector<Comparison> designate(const ScenarioConfig& cfg, const DataMatrix& data, const Partition& part,
                                  std::size_t rep) {
  const int kc = part.cluster_count();
  std::vector<Comparison> out;
  switch (cfg.comparisons) {
    case Comparisons::all:
      for (int a = 1; a <= kc; ++a) {
        for (int b = a + 1; b <= kc; ++b) {
          for (std::size_t g = 0; g < data.cols(); ++g) out.push_back({a, b, g});
        }
      }
      break;
    case Comparisons::extreme: {
      const auto x = data.column(0);
      std::vector<double> sum(static_cast<std::size_t>(kc) + 1, 0.0);
      for (std::size_t i = 0; i < x.size(); ++i) sum[static_cast<std::size_t>(part.label(i))] += x[i];
      int lo = 1, hi = 1;
      double mlo = std::numeric_limits<double>::infinity(), mhi = -mlo;
      for (int id = 1; id <= kc; ++id) {
        const double m = sum[static_cast<std::size_t>(id)] / static_cast<double>(part.cluster_size(id));
        if (m < mlo) mlo = m, lo = id;
        if (m > mhi) mhi = m, hi = id;
      }
      out.push_back({std::min(lo, hi), std::max(lo, hi), 0});
      break;
    }
    case Comparisons::random: {
      Rng rng = make_rng(derive_seed(replicate_seed(cfg, rep), 1));
      const int pairs = kc * (kc - 1) / 2;
      std::uniform_int_distribution<int> pick_pair(0, pairs - 1);
      std::uniform_int_distribution<std::size_t> pick_var(0, data.cols() - 1);
      int idx = pick_pair(rng);
      const std::size_t g = pick_var(rng);
      for (int a = 1; a <= kc; ++a) {
        for (int b = a + 1; b <= kc; ++b) {
          if (idx-- == 0) out.push_back({a, b, g});
        }
      }
      break;
    }
    case Comparisons::first:
      out.push_back({1, 2, 0});
      break;
  }
  return out;
}

std::vector<ComparisonRecord> run_replicate(const ScenarioConfig& cfg, std::size_t rep, const Clusterer& clusterer,
                                            DipCalibration& calibration) {
  const DataMatrix data = generate_replicate(cfg, rep);
  const Partition part = clusterer.cluster(data);
  std::vector<ComparisonRecord> out;
  const auto comps = designate(cfg, data, part, rep);
  for (std::size_t ci = 0; ci < comps.size(); ++ci) {
    const auto [k, l, g] = comps[ci];
    SelectiveOptions opts;
    opts.n_samples = cfg.mc_samples;
    opts.seed = derive_seed(replicate_seed(cfg, rep), 100 + ci);
    std::optional<PValueResult> direct;
    for (Method m : all_methods()) {
      if (std::find(cfg.methods.begin(), cfg.methods.end(), m) == cfg.methods.end()) continue;
      ComparisonRecord rec;
      rec.replication = rep;
      rec.k = k;
      rec.l = l;
      rec.variable = g;
      rec.method = m;
      try {
        PValueResult r;
        switch (m) {
          case Method::direct:
            r = selective_p_value(data, g, part, k, l, clusterer, opts);
            direct = r;
            break;
          case Method::merged:
            // a two-cluster between-set is the direct test, seed for seed
            if (direct && between_set(data.column(g), part, k, l, g).size() == 2) {
              r = *direct;
              r.method = Method::merged;
              r.components = {direct->p};
            } else {
              r = merged_selective_p_value(data, g, part, k, l, clusterer, opts);
            }
            break;
          case Method::dip:
            r = dip_test_between(data, g, part, k, l, calibration);
            break;
          case Method::ttest:
            r = t_test_p_value(data.column(g), part, k, l, cfg.ttest);
            break;
        }
        rec.p = r.p;
        rec.statistic = r.statistic;
        rec.n_preserved = r.n_preserved;
      } catch (const std::exception& e) {
        rec.p = std::numeric_limits<double>::quiet_NaN();
        rec.statistic = std::numeric_limits<double>::quiet_NaN();
        rec.error = e.what();
      }
      out.push_back(std::move(rec));
    }
  }
  return out;
}

void append_number(std::string& s, double v) {
  if (std::isnan(v)) {
    s += "NA";
    return;
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  s.append(buf, res.ptr);
}

nlohmann::ordered_json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

DataMatrix generate_replicate(const ScenarioConfig& cfg, std::size_t rep) {
  Rng rng = make_rng(derive_seed(replicate_seed(cfg, rep), 0));
  switch (cfg.scenario) {
    case Scenario::null_gaussian: return gen_null_gaussian(cfg.n, cfg.p, rng);
    case Scenario::three_clusters: return gen_three_clusters(cfg.n / 3, rng).data;
    case Scenario::contamination: return gen_contamination(cfg.n, cfg.delta, rng);
    case Scenario::intervening: return gen_intervening(cfg.n, cfg.delta, rng).data;
    case Scenario::robustness: return gen_robustness(cfg.n, cfg.p, cfg.distribution, rng);
  }
  throw std::logic_error("unhandled scenario");
}

double ks_to_uniform(std::span<const double> pvals) {
  if (pvals.empty()) throw std::invalid_argument("ks_to_uniform: empty p-value list");
  std::vector<double> v(pvals.begin(), pvals.end());
  for (double p : v) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("ks_to_uniform: p-values must lie in [0, 1]");
  }
  std::sort(v.begin(), v.end());
  const double m = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double above = static_cast<double>(i + 1) / m - v[i];
    const double below = v[i] - static_cast<double>(i) / m;
    d = std::max({d, above, below});
  }
  return d;
}

std::vector<double> SimulationReport::pvalues(Method m) const {
  std::vector<double> out;
  for (const auto& r : records) {
    if (r.method == m && r.ok()) out.push_back(r.p);
  }
  return out;
}

const MethodSummary* SimulationReport::summary(Method m) const {
  for (const auto& s : summaries) {
    if (s.method == m) return &s;
  }
  return nullptr;
}

SimulationReport run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const WardClusterer clusterer(cfg.k);
  DipCalibration calibration(cfg.dip_reps, dip_calibration_seed(cfg.seed));

  std::vector<std::vector<ComparisonRecord>> per_rep(cfg.n_reps);
  std::vector<char> failed(cfg.n_reps, 0);
  parallel_for(cfg.n_reps, cfg.threads, [&](std::size_t rep) {
    try {
      per_rep[rep] = run_replicate(cfg, rep, clusterer, calibration);
    } catch (const std::exception&) {
      failed[rep] = 1;
    }
  });

  SimulationReport report;
  report.config = cfg;
  for (std::size_t rep = 0; rep < cfg.n_reps; ++rep) {
    report.replication_failures += failed[rep] ? 1 : 0;
    for (auto& r : per_rep[rep]) report.records.push_back(std::move(r));
  }
  for (Method m : all_methods()) {
    if (std::find(cfg.methods.begin(), cfg.methods.end(), m) == cfg.methods.end()) continue;
    MethodSummary s;
    s.method = m;
    std::size_t rejected = 0;
    for (const auto& r : report.records) {
      if (r.method != m) continue;
      ++s.tests;
      if (!r.ok()) {
        ++s.failures;
      } else if (r.p <= cfg.alpha) {
        ++rejected;
      }
    }
    const auto ps = report.pvalues(m);
    s.rejection_rate = ps.empty() ? std::numeric_limits<double>::quiet_NaN()
                                  : static_cast<double>(rejected) / static_cast<double>(ps.size());
    s.ks_to_uniform = ps.empty() ? std::numeric_limits<double>::quiet_NaN() : ks_to_uniform(ps);
    report.summaries.push_back(s);
  }
  report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

std::string report_to_json(const SimulationReport& report, std::string_view manifest_ref) {
  using nlohmann::ordered_json;
  const auto& c = report.config;
  ordered_json j;
  j["schema"] = "pcinf.simulation/1";
  j["version"] = PCINF_VERSION;
  if (!manifest_ref.empty()) j["manifest"] = manifest_ref;
  ordered_json cfg;
  cfg["scenario"] = scenario_name(c.scenario);
  cfg["n"] = c.n;
  cfg["p"] = c.p;
  cfg["delta"] = c.delta;
  cfg["k"] = c.k;
  cfg["reps"] = c.n_reps;
  cfg["alpha"] = c.alpha;
  cfg["mc_samples"] = c.mc_samples;
  cfg["dip_reps"] = c.dip_reps;
  cfg["seed"] = c.seed;
  cfg["comparisons"] = comparisons_name(c.comparisons);
  if (c.scenario == Scenario::robustness) cfg["distribution"] = distribution_name(c.distribution);
  ordered_json methods = ordered_json::array();
  for (Method m : c.methods) methods.push_back(method_name(m));
  cfg["methods"] = methods;
  cfg["ttest"] = c.ttest == TTestKind::welch ? "welch" : "pooled";
  j["config"] = cfg;

  ordered_json summary = ordered_json::array();
  for (const auto& s : report.summaries) {
    summary.push_back({{"method", method_name(s.method)},
                       {"tests", s.tests},
                       {"failures", s.failures},
                       {"rejection_rate", number_or_null(s.rejection_rate)},
                       {"ks_to_uniform", number_or_null(s.ks_to_uniform)}});
  }
  j["summary"] = summary;
  j["replication_failures"] = report.replication_failures;

  ordered_json records = ordered_json::array();
  for (const auto& r : report.records) {
    ordered_json o;
    o["replication"] = r.replication;
    o["k"] = r.k;
    o["l"] = r.l;
    o["variable"] = r.variable;
    o["method"] = method_name(r.method);
    o["p"] = number_or_null(r.p);
    o["statistic"] = number_or_null(r.statistic);
    o["n_preserved"] = r.n_preserved;
    if (!r.ok()) o["error"] = r.error;
    records.push_back(std::move(o));
  }
  j["records"] = records;
  return j.dump(2) + "\n";
}

void write_report_tsv(std::ostream& out, const SimulationReport& report) {
  out << "replication\tk\tl\tvariable\tmethod\tp\tstatistic\tn_preserved\terror\n";
  std::string line;
  for (const auto& r : report.records) {
    line.clear();
    line += std::to_string(r.replication) + '\t' + std::to_string(r.k) + '\t' + std::to_string(r.l) + '\t' +
            std::to_string(r.variable) + '\t' + std::string(method_name(r.method)) + '\t';
    append_number(line, r.p);
    line += '\t';
    append_number(line, r.statistic);
    line += '\t' + std::to_string(r.n_preserved) + '\t' + r.error + '\n';
    out << line;
  }
}

}  // namespace pcinf
