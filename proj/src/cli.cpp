#include "pcinf/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <limits>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcinf/clusterer.hpp"
#include "pcinf/clustering.hpp"
#include "pcinf/dataset.hpp"
#include "pcinf/dip.hpp"
#include "pcinf/error.hpp"
#include "pcinf/harness.hpp"
#include "pcinf/manifest.hpp"
#include "pcinf/merging.hpp"
#include "pcinf/parallel.hpp"
#include "pcinf/report.hpp"

namespace pcinf {

TestTable run_pairwise_tests(const DataMatrix& data, const TestRequest& request) {
  if (request.k < 2) throw UsageError("need at least two clusters");
  if (request.k > data.rows()) {
    throw DataError("K = " + std::to_string(request.k) + " exceeds the " + std::to_string(data.rows()) +
                    " observations");
  }
  if (data.has_missing()) throw DataError("data contain missing values; drop incomplete rows first");

  std::vector<std::size_t> vars;
  if (request.variables.empty()) {
    for (std::size_t g = 0; g < data.cols(); ++g) vars.push_back(g);
  } else {
    for (const auto& name : request.variables) {
      try {
        vars.push_back(data.column_index(name));
      } catch (const std::out_of_range&) {
        throw UsageError("unknown variable '" + name + "'");
      }
    }
    // tables list variables in column order whatever order they were named in
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  }

  const WardClusterer clusterer(request.k);
  TestTable table;
  table.partition = clusterer.cluster(data);
  const int kc = table.partition.cluster_count();

  std::vector<std::pair<int, int>> pairs;
  if (request.pair) {
    auto [a, b] = *request.pair;
    if (a == b || a < 1 || b < 1 || a > kc || b > kc) {
      throw UsageError("--pair must name two different clusters in 1.." + std::to_string(kc));
    }
    pairs.emplace_back(a, b);
  } else {
    for (int a = 1; a <= kc; ++a) {
      for (int b = a + 1; b <= kc; ++b) pairs.emplace_back(a, b);
    }
  }

  DipCalibration calibration(request.dip_reps, derive_seed(request.seed, std::numeric_limits<std::uint64_t>::max()),
                             request.threads);
  std::size_t comparison = 0;
  for (const auto& [a, b] : pairs) {
    for (std::size_t g : vars) {
      SelectiveOptions opts;
      opts.n_samples = request.mc_samples;
      opts.variance = request.variance;
      opts.seed = derive_seed(request.seed, comparison++);
      opts.threads = request.threads;
      for (Method m : all_methods()) {
        if (std::find(request.methods.begin(), request.methods.end(), m) == request.methods.end()) continue;
        TestCell cell;
        cell.k = a;
        cell.l = b;
        cell.variable = g;
        cell.variable_name = data.column_names()[g];
        cell.method = m;
        try {
          switch (m) {
            case Method::direct:
              cell.result = selective_p_value(data, g, table.partition, a, b, clusterer, opts);
              break;
            case Method::merged:
              cell.result = merged_selective_p_value(data, g, table.partition, a, b, clusterer, opts);
              break;
            case Method::dip:
              cell.result = dip_test_between(data, g, table.partition, a, b, calibration);
              break;
            case Method::ttest:
              cell.result = t_test_p_value(data.column(g), table.partition, a, b, request.ttest);
              break;
          }
        } catch (const UsageError&) {
          throw;
        } catch (const std::exception& e) {
          cell.error = e.what();
        }
        table.cells.push_back(std::move(cell));
      }
    }
  }
  return table;
}

namespace {

std::string fixed4(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", p);
  return buf;
}

nlohmann::ordered_json finite_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

std::vector<Method> methods_from_flag(const std::string& flag) {
  if (flag == "all") return all_methods();
  return {parse_method(flag)};
}

std::pair<int, int> parse_pair(const std::string& s) {
  const auto comma = s.find(',');
  auto to_int = [&](std::string_view part) {
    int v = 0;
    const auto res = std::from_chars(part.data(), part.data() + part.size(), v);
    if (res.ec != std::errc() || res.ptr != part.data() + part.size()) {
      throw UsageError("--pair expects two cluster ids as k,l (got '" + s + "')");
    }
    return v;
  };
  if (comma == std::string::npos) throw UsageError("--pair expects two cluster ids as k,l (got '" + s + "')");
  const std::string_view sv(s);
  return {to_int(sv.substr(0, comma)), to_int(sv.substr(comma + 1))};
}

std::vector<std::pair<std::string, std::string>> parse_where(const std::vector<std::string>& items) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& w : items) {
    const auto eq = w.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--where expects column=value (got '" + w + "')");
    out.emplace_back(w.substr(0, eq), w.substr(eq + 1));
  }
  return out;
}

// Writes text to path, or to out when path is empty; returns its digest.
std::string emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return {};
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write '" + path + "'");
  f << text;
  if (!f) throw DataError("failed writing '" + path + "'");
  return sha256_hex(text);
}

std::string basename_of(const std::string& path) { return std::filesystem::path(path).filename().string(); }

struct TestArgs {
  std::string input;
  std::vector<std::string> columns;
  std::vector<std::string> where;
  bool scale = false;
  std::size_t k = 3;
  std::string pair;
  std::vector<std::string> variables;
  std::string method = "all";
  std::size_t mc_samples = 2000;
  std::size_t dip_reps = 2000;
  double alpha = 0.05;
  std::uint64_t seed = kDefaultSeed;
  std::string out;
  std::string format = "tsv";
  std::string ttest = "welch";
  std::string variance = "pair";
  std::string dendrogram;
  unsigned threads = default_threads();
};

int cmd_test(const TestArgs& a, const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  if (a.k < 2) throw UsageError("need at least two clusters");
  if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
  if (a.mc_samples < 1) throw UsageError("--mc-samples must be at least 1");
  if (a.dip_reps < 1) throw UsageError("--dip-reps must be at least 1");

  TestRequest req;
  req.k = a.k;
  if (!a.pair.empty()) req.pair = parse_pair(a.pair);
  req.variables = a.variables;
  req.methods = methods_from_flag(a.method);
  req.mc_samples = a.mc_samples;
  req.dip_reps = a.dip_reps;
  req.variance = a.variance == "all" ? VarianceMode::all_observations : VarianceMode::pair;
  req.ttest = a.ttest == "pooled" ? TTestKind::pooled : TTestKind::welch;
  req.seed = a.seed;
  req.threads = std::max(1u, a.threads);
  const auto where = parse_where(a.where);

  CsvOptions csv;
  csv.columns = a.columns;
  DataMatrix data = load_csv(a.input, csv);
  if (!where.empty()) data = filter_rows(data, where);
  data = drop_incomplete_rows(data);
  if (a.scale) data = zscale(data);

  const TestTable table = run_pairwise_tests(data, req);

  std::size_t failed = 0;
  for (const auto& c : table.cells) failed += c.result ? 0 : 1;

  RunManifest manifest;
  manifest.command = "test";
  for (std::size_t i = 0; i < argv.size(); ++i) manifest.config["argv"].push_back(argv[i]);
  manifest.config["rows_used"] = data.rows();
  manifest.config["columns"] = data.column_names();
  manifest.seed = a.seed;
  manifest.input_path = a.input;
  manifest.input_sha256 = sha256_file(a.input);
  manifest.timestamp = utc_timestamp();

  const std::string manifest_path = a.out.empty() ? std::string() : a.out + ".manifest.json";
  std::string text;
  if (a.format == "json") {
    nlohmann::ordered_json j;
    j["schema"] = "pcinf.test/1";
    j["version"] = PCINF_VERSION;
    j["n"] = data.rows();
    j["k"] = table.partition.cluster_count();
    nlohmann::ordered_json sizes = nlohmann::ordered_json::array();
    for (int id = 1; id <= table.partition.cluster_count(); ++id) sizes.push_back(table.partition.cluster_size(id));
    j["cluster_sizes"] = sizes;
    j["alpha"] = a.alpha;
    nlohmann::ordered_json results = nlohmann::ordered_json::array();
    for (const auto& c : table.cells) {
      nlohmann::ordered_json o;
      o["k"] = c.k;
      o["l"] = c.l;
      o["variable"] = c.variable_name;
      o["method"] = method_name(c.method);
      if (c.result) {
        const auto& r = *c.result;
        o["p"] = r.p;
        o["significant"] = r.p <= a.alpha;
        o["statistic"] = finite_or_null(r.statistic);
        o["sample_size"] = r.sample_size;
        if (c.method == Method::direct || c.method == Method::merged) {
          o["n_samples"] = r.n_samples;
          o["n_preserved"] = r.n_preserved;
          o["sigma_sq"] = r.sigma_sq ? finite_or_null(*r.sigma_sq) : nlohmann::ordered_json(nullptr);
        }
        if (c.method == Method::dip) o["replicates"] = r.n_samples;
        if (c.method == Method::merged) o["components"] = r.components;
        if (r.warning) o["warning"] = r.warning_text;
      } else {
        o["p"] = nullptr;
        o["error"] = c.error;
      }
      results.push_back(std::move(o));
    }
    j["results"] = results;
    if (manifest_path.empty()) {
      manifest.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      j["manifest"] = manifest_to_json(manifest);
    } else {
      j["manifest"] = basename_of(manifest_path);
    }
    text = j.dump(2) + "\n";
  } else {
    std::ostringstream s;
    s << "k\tl\tvariable";
    for (Method m : req.methods) s << '\t' << method_name(m);
    s << "\tnotes\n";
    // cells come grouped by comparison with methods in canonical order
    for (std::size_t i = 0; i < table.cells.size(); i += req.methods.size()) {
      const auto& first = table.cells[i];
      s << first.k << '\t' << first.l << '\t' << first.variable_name;
      std::string notes;
      for (std::size_t m = 0; m < req.methods.size(); ++m) {
        const auto& c = table.cells[i + m];
        s << '\t' << (c.result ? fixed4(c.result->p) : std::string("NA"));
        const std::string note = c.result ? (c.result->warning ? c.result->warning_text : "") : c.error;
        if (!note.empty()) notes += (notes.empty() ? "" : "; ") + std::string(method_name(c.method)) + ": " + note;
      }
      s << '\t' << notes << '\n';
    }
    text = s.str();
  }

  const std::string digest = emit(a.out, text, out);
  if (!a.dendrogram.empty()) {
    const std::string dj = dendrogram_to_json(ward_linkage(data)) + "\n";
    manifest.outputs.emplace_back(a.dendrogram, emit(a.dendrogram, dj, out));
  }
  if (!manifest_path.empty()) {
    manifest.outputs.emplace_back(a.out, digest);
    manifest.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    emit(manifest_path, manifest_to_json(manifest).dump(2) + "\n", out);
  }
  if (!table.cells.empty() && failed == table.cells.size()) {
    err << "error: every test failed";
    if (!table.cells.front().error.empty()) err << " (" << table.cells.front().error << ")";
    err << '\n';
    return kExitData;
  }
  return kExitOk;
}

struct SimulateArgs {
  std::string scenario;
  std::size_t n = 0, p = 0, k = 0, reps = 0, mc_samples = 0, dip_reps = 0;
  double delta = 0.0, alpha = 0.05;
  std::uint64_t seed = kDefaultSeed;
  std::string comparisons, distribution = "gaussian", ttest = "welch";
  std::vector<std::string> methods;
  std::string out;
  unsigned threads = default_threads();
};

int cmd_simulate(const SimulateArgs& a, const CLI::App& sub, const std::vector<std::string>& argv,
                 std::ostream& out) {
  ScenarioConfig cfg = ScenarioConfig::defaults(parse_scenario(a.scenario));
  auto given = [&](const char* name) { return sub.count(name) > 0; };
  if (given("--n")) cfg.n = a.n;
  if (given("--p")) cfg.p = a.p;
  if (given("--k")) cfg.k = a.k;
  if (given("--reps")) cfg.n_reps = a.reps;
  if (given("--mc-samples")) cfg.mc_samples = a.mc_samples;
  if (given("--dip-reps")) cfg.dip_reps = a.dip_reps;
  if (given("--delta")) cfg.delta = a.delta;
  if (given("--alpha")) cfg.alpha = a.alpha;
  if (given("--comparisons")) cfg.comparisons = parse_comparisons(a.comparisons);
  cfg.seed = a.seed;
  cfg.distribution = parse_distribution(a.distribution);
  cfg.ttest = a.ttest == "pooled" ? TTestKind::pooled : TTestKind::welch;
  if (!a.methods.empty()) {
    cfg.methods.clear();
    for (const auto& m : a.methods) {
      for (Method x : methods_from_flag(m)) {
        if (std::find(cfg.methods.begin(), cfg.methods.end(), x) == cfg.methods.end()) cfg.methods.push_back(x);
      }
    }
  }
  cfg.threads = std::max(1u, a.threads);
  cfg.validate();

  const SimulationReport report = run_scenario(cfg);

  std::ostringstream summary;
  summary << "method\ttests\tfailures\trejection_rate\tks_to_uniform\n";
  for (const auto& s : report.summaries) {
    summary << method_name(s.method) << '\t' << s.tests << '\t' << s.failures << '\t'
            << (std::isnan(s.rejection_rate) ? std::string("NA") : fixed4(s.rejection_rate)) << '\t'
            << (std::isnan(s.ks_to_uniform) ? std::string("NA") : fixed4(s.ks_to_uniform)) << '\n';
  }
  out << summary.str();

  if (!a.out.empty()) {
    const std::string json_path = a.out + ".json";
    const std::string tsv_path = a.out + ".tsv";
    const std::string manifest_path = a.out + ".manifest.json";
    RunManifest manifest;
    manifest.command = "simulate";
    for (const auto& s : argv) manifest.config["argv"].push_back(s);
    manifest.config["threads"] = cfg.threads;
    manifest.seed = cfg.seed;
    manifest.timestamp = utc_timestamp();
    manifest.runtime_seconds = report.runtime_seconds;
    manifest.outputs.emplace_back(json_path, emit(json_path, report_to_json(report, basename_of(manifest_path)), out));
    std::ostringstream tsv;
    write_report_tsv(tsv, report);
    manifest.outputs.emplace_back(tsv_path, emit(tsv_path, tsv.str(), out));
    emit(manifest_path, manifest_to_json(manifest).dump(2) + "\n", out);
  }
  return kExitOk;
}

int cmd_report(const std::vector<std::string>& files, const std::string& path, const std::string& format,
               std::ostream& out) {
  if (files.empty()) throw UsageError("no reports given");
  std::vector<nlohmann::json> reports;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw DataError("cannot read '" + f + "'");
    try {
      reports.push_back(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("'" + f + "' is not valid JSON: " + e.what());
    }
  }
  PowerTable table;
  try {
    table = merge_reports(reports);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
  std::string text;
  if (format == "json") {
    text = power_to_json(table);
  } else {
    std::ostringstream s;
    write_power_tsv(s, table);
    text = s.str();
  }
  emit(path, text, out);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Post-clustering inference: selective, merged selective and dip tests", "pcinf"};
  app.set_version_flag("--version", std::string("pcinf ") + PCINF_VERSION);
  app.require_subcommand(1);

  TestArgs ta;
  auto* test = app.add_subcommand("test", "Cluster a CSV file and test every cluster pair on every variable");
  test->add_option("--input", ta.input, "CSV file with a header row")->required();
  test->add_option("--columns", ta.columns, "Numeric columns to use (comma-separated)")->delimiter(',');
  test->add_option("--where", ta.where, "Keep rows whose label column equals a value (column=value)");
  test->add_flag("--scale", ta.scale, "Centre and scale each column to unit variance");
  test->add_option("--k", ta.k, "Number of clusters to cut the dendrogram at")->capture_default_str();
  test->add_option("--pair", ta.pair, "Only test clusters k,l");
  test->add_option("--variable", ta.variables, "Only test these variables");
  test->add_option("--method", ta.method, "Test to run")
      ->check(CLI::IsMember({"direct", "merged", "dip", "ttest", "all"}))
      ->capture_default_str();
  test->add_option("--mc-samples", ta.mc_samples, "Monte-Carlo samples per selective test")->capture_default_str();
  test->add_option("--dip-reps", ta.dip_reps, "Uniform replicates calibrating the dip test")->capture_default_str();
  test->add_option("--alpha", ta.alpha, "Significance level reported in JSON output")->capture_default_str();
  test->add_option("--seed", ta.seed, "Master seed")->capture_default_str();
  test->add_option("--out", ta.out, "Output file (default: standard output)");
  test->add_option("--format", ta.format, "Output format")->check(CLI::IsMember({"tsv", "json"}))->capture_default_str();
  test->add_option("--ttest", ta.ttest, "t-test variance model")
      ->check(CLI::IsMember({"welch", "pooled"}))
      ->capture_default_str();
  test->add_option("--variance", ta.variance, "Selective-test variance plug-in")
      ->check(CLI::IsMember({"pair", "all"}))
      ->capture_default_str();
  test->add_option("--dendrogram", ta.dendrogram, "Also write the full dendrogram as JSON to this file");
  test->add_option("--threads", ta.threads, "Worker threads")->capture_default_str();

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Run a simulation scenario and report rejection rates");
  sim->add_option("--scenario", sa.scenario, "null_gaussian | three_clusters | contamination | intervening | robustness")
      ->required();
  sim->add_option("--n", sa.n, "Sample size");
  sim->add_option("--p", sa.p, "Dimension");
  sim->add_option("--delta", sa.delta, "Mean separation");
  sim->add_option("--k", sa.k, "Clusters to cut");
  sim->add_option("--reps", sa.reps, "Replications");
  sim->add_option("--alpha", sa.alpha, "Significance level");
  sim->add_option("--mc-samples", sa.mc_samples, "Monte-Carlo samples per selective test");
  sim->add_option("--dip-reps", sa.dip_reps, "Uniform replicates calibrating the dip test");
  sim->add_option("--seed", sa.seed, "Master seed")->capture_default_str();
  sim->add_option("--comparisons", sa.comparisons, "all | extreme | random | first");
  sim->add_option("--distribution", sa.distribution, "Robustness distribution")->capture_default_str();
  sim->add_option("--method", sa.methods, "Methods to run (repeatable; default all)");
  sim->add_option("--ttest", sa.ttest, "t-test variance model")
      ->check(CLI::IsMember({"welch", "pooled"}))
      ->capture_default_str();
  sim->add_option("--out", sa.out, "Output prefix for .json, .tsv and .manifest.json");
  sim->add_option("--threads", sa.threads, "Worker threads")->capture_default_str();

  std::vector<std::string> report_files;
  std::string report_out, report_format = "tsv";
  auto* rep = app.add_subcommand("report", "Merge simulation reports into one rejection-rate table");
  rep->add_option("reports", report_files, "Simulation report JSON files");
  rep->add_option("--out", report_out, "Output file (default: standard output)");
  rep->add_option("--format", report_format, "Output format")
      ->check(CLI::IsMember({"tsv", "json"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    if (*test) return cmd_test(ta, args, out, err);
    if (*sim) return cmd_simulate(sa, *sim, args, out);
    if (*rep) return cmd_report(report_files, report_out, report_format, out);
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace pcinf
