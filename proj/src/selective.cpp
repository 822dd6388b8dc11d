#include "pcinf/selective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "pcinf/error.hpp"
#include "pcinf/parallel.hpp"
#include "pcinf/variance.hpp"

namespace pcinf {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::direct: return "direct";
    case Method::merged: return "merged";
    case Method::dip: return "dip";
    case Method::ttest: return "ttest";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::direct, Method::merged, Method::dip, Method::ttest}) {
    if (method_name(m) == name) return m;
  }
  throw UsageError("unknown method '" + std::string(name) + "'");
}

namespace {

void check_pair(const Partition& part, int k, int l) {
  if (k == l) throw UsageError("cluster ids must differ (got " + std::to_string(k) + " twice)");
  for (int id : {k, l}) {
    if (!part.has_cluster(id)) {
      throw UsageError("no cluster " + std::to_string(id) + " (K = " + std::to_string(part.cluster_count()) + ")");
    }
  }
}

double mean_of(std::span<const double> x, const std::vector<std::size_t>& rows) {
  double s = 0.0;
  for (auto i : rows) s += x[i];
  return s / static_cast<double>(rows.size());
}

}  // namespace

ContrastVector contrast_vector(const Partition& part, int k, int l) {
  check_pair(part, k, l);
  ContrastVector cv;
  cv.k = k;
  cv.l = l;
  cv.eta.assign(part.size(), 0.0);
  const auto& ck = part.members(k);
  const auto& cl = part.members(l);
  const double nk = static_cast<double>(ck.size());
  const double nl = static_cast<double>(cl.size());
  for (auto i : ck) cv.eta[i] = 1.0 / nk;
  for (auto i : cl) cv.eta[i] = -1.0 / nl;
  cv.norm_sq = 1.0 / nk + 1.0 / nl;
  return cv;
}

double test_statistic(std::span<const double> x, const ContrastVector& cv) {
  if (x.size() != cv.eta.size()) throw std::invalid_argument("test_statistic: length mismatch");
  // accumulate each mean separately so the result is exactly mean(Ck) - mean(Cl)
  double pos = 0.0, neg = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (cv.eta[i] > 0.0) pos += x[i];
    if (cv.eta[i] < 0.0) neg += x[i];
  }
  double nk = 0.0, nl = 0.0;
  for (double e : cv.eta) {
    nk += e > 0.0 ? 1.0 : 0.0;
    nl += e < 0.0 ? 1.0 : 0.0;
  }
  return pos / nk - neg / nl;
}

DataMatrix perturb_column(const DataMatrix& X, std::size_t g, const ContrastVector& cv, double phi) {
  if (g >= X.cols()) throw std::out_of_range("perturb_column: column index out of range");
  if (X.rows() != cv.eta.size()) throw std::invalid_argument("perturb_column: length mismatch");
  DataMatrix out = X;
  const auto x = X.column(g);
  auto y = out.column(g);
  const double shift = (phi - test_statistic(x, cv)) / cv.norm_sq;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (cv.eta[i] != 0.0) y[i] = x[i] + cv.eta[i] * shift;
  }
  return out;
}

double variance_pair(std::span<const double> x, const Partition& part, int k, int l) {
  check_pair(part, k, l);
  const int ids[] = {k, l};
  return union_variance(x, part, ids);
}

double variance_all(std::span<const double> x) {
  if (x.size() < 2) throw DataError("variance needs at least two observations");
  double s = 0.0;
  for (double v : x) s += v;
  const double mean = s / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(x.size() - 1);
}

double union_variance(std::span<const double> x, const Partition& part, std::span<const int> clusters) {
  if (x.size() != part.size()) throw std::invalid_argument("variance: length mismatch");
  std::vector<char> in(static_cast<std::size_t>(part.cluster_count()) + 1, 0);
  for (int id : clusters) in[static_cast<std::size_t>(id)] = 1;
  // rows visited in index order whatever the cluster order
  double s = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (in[static_cast<std::size_t>(part.label(i))]) {
      s += x[i];
      ++count;
    }
  }
  if (count < 2) throw DataError("variance needs at least two observations");
  const double mean = s / static_cast<double>(count);
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (in[static_cast<std::size_t>(part.label(i))]) ss += (x[i] - mean) * (x[i] - mean);
  }
  return ss / static_cast<double>(count - 1);
}

double selective_estimate(std::span<const PerturbationSample> samples, std::size_t* n_preserved) {
  double max_lw = -std::numeric_limits<double>::infinity();
  std::size_t kept = 0;
  for (const auto& s : samples) {
    if (!s.preserved) continue;
    ++kept;
    max_lw = std::max(max_lw, s.log_weight);
  }
  if (n_preserved) *n_preserved = kept;
  if (kept == 0) return 1.0;
  long double num = 0.0L, den = 0.0L;
  for (const auto& s : samples) {
    if (!s.preserved) continue;
    const long double w = std::exp(static_cast<long double>(s.log_weight) - max_lw);
    den += w;
    if (s.exceeds) num += w;
  }
  const long double pibar = den / static_cast<long double>(samples.size());
  const double p = static_cast<double>((num + pibar) / (den + pibar));
  return std::clamp(p, std::numeric_limits<double>::min(), 1.0);
}

PValueResult selective_p_value(const DataMatrix& X, std::size_t g, const Partition& part, int k, int l,
                               const Clusterer& clusterer, const SelectiveOptions& options,
                               std::vector<PerturbationSample>* samples) {
  if (g >= X.cols()) throw UsageError("variable index out of range");
  if (part.size() != X.rows()) throw std::invalid_argument("selective_p_value: partition does not match data");
  if (options.n_samples < 1) throw UsageError("need at least one Monte-Carlo sample");
  check_pair(part, k, l);

  // the test is computed for (min, max) and the statistic's sign restored
  const int a = std::min(k, l);
  const int b = std::max(k, l);
  const ContrastVector cv = contrast_vector(part, a, b);
  const auto x = X.column(g);
  const double m = test_statistic(x, cv);

  double sigma_sq = 0.0;
  if (options.sigma_sq) {
    sigma_sq = *options.sigma_sq;
    if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq)) throw UsageError("sigma_sq must be positive and finite");
  } else {
    sigma_sq = options.variance == VarianceMode::pair ? variance_pair(x, part, a, b) : variance_all(x);
  }
  if (!(sigma_sq > 0.0)) throw DataError("degenerate variance on variable '" + X.column_names()[g] + "'");

  const double s2 = sigma_sq * cv.norm_sq;
  const double s = std::sqrt(s2);
  std::vector<std::size_t> moved = part.members(a);
  moved.insert(moved.end(), part.members(b).begin(), part.members(b).end());
  std::sort(moved.begin(), moved.end());

  const std::size_t n_draws = options.n_samples;
  std::vector<PerturbationSample> local;
  auto& out = samples ? *samples : local;
  out.assign(n_draws, {});
  const std::size_t blocks = std::min<std::size_t>(std::max(1u, options.threads), n_draws);
  parallel_for(blocks, static_cast<unsigned>(blocks), [&](std::size_t blk) {
    const std::size_t begin = blk * n_draws / blocks;
    const std::size_t end = (blk + 1) * n_draws / blocks;
    DataMatrix work = X;
    auto col = work.column(g);
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = make_rng(derive_seed(options.seed, i));
      std::normal_distribution<double> normal(0.0, 1.0);
      const double omega = m + s * normal(rng);
      const double shift = (omega - m) / cv.norm_sq;
      for (auto r : moved) col[r] = x[r] + cv.eta[r] * shift;
      auto& smp = out[i];
      smp.omega = omega;
      smp.log_weight = (m * m - 2.0 * m * omega) / (2.0 * s2);
      smp.weight = std::min(std::exp(smp.log_weight), std::numeric_limits<double>::max());
      smp.exceeds = std::abs(omega) >= std::abs(m);
      smp.preserved = clusterer.preserves(work, part, a, b);
    }
  });

  PValueResult r;
  r.method = Method::direct;
  r.statistic = k == a ? m : -m;
  r.n_samples = n_draws;
  r.sigma_sq = sigma_sq;
  r.sample_size = X.rows();
  r.p = selective_estimate(out, &r.n_preserved);
  if (r.n_preserved == 0) {
    r.warning = true;
    r.warning_text = "no preserved samples";
  }
  return r;
}

PValueResult t_test_p_value(std::span<const double> x, const Partition& part, int k, int l, TTestKind kind) {
  check_pair(part, k, l);
  if (x.size() != part.size()) throw std::invalid_argument("t_test_p_value: length mismatch");
  const auto& ck = part.members(k);
  const auto& cl = part.members(l);
  if (ck.size() < 2 || cl.size() < 2) throw DataError("cluster too small for a t-test (need 2 members each)");
  const double nk = static_cast<double>(ck.size());
  const double nl = static_cast<double>(cl.size());
  const double mk = mean_of(x, ck);
  const double ml = mean_of(x, cl);
  double ssk = 0.0, ssl = 0.0;
  for (auto i : ck) ssk += (x[i] - mk) * (x[i] - mk);
  for (auto i : cl) ssl += (x[i] - ml) * (x[i] - ml);
  const double vk = ssk / (nk - 1.0);
  const double vl = ssl / (nl - 1.0);

  double se_sq = 0.0, df = 0.0;
  if (kind == TTestKind::pooled) {
    const double sp = (ssk + ssl) / (nk + nl - 2.0);
    se_sq = sp * (1.0 / nk + 1.0 / nl);
    df = nk + nl - 2.0;
  } else {
    const double ak = vk / nk, al = vl / nl;
    se_sq = ak + al;
    df = se_sq * se_sq / (ak * ak / (nk - 1.0) + al * al / (nl - 1.0));
  }
  if (!(se_sq > 0.0)) throw DataError("zero within-cluster variance; t statistic undefined");

  PValueResult r;
  r.method = Method::ttest;
  r.statistic = (mk - ml) / std::sqrt(se_sq);
  r.sample_size = ck.size() + cl.size();
  const boost::math::students_t dist(df);
  r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.statistic))));
  return r;
}

}  // namespace pcinf
