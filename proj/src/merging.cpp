#include "pcinf/merging.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pcinf/error.hpp"
#include "pcinf/variance.hpp"

namespace pcinf {

BetweenSet between_set(std::span<const double> x, const Partition& part, int k, int l, std::size_t g) {
  if (k == l) throw UsageError("cluster ids must differ");
  if (!part.has_cluster(k) || !part.has_cluster(l)) throw UsageError("cluster id out of range");
  if (x.size() != part.size()) throw std::invalid_argument("between_set: length mismatch");
  const int kc = part.cluster_count();
  std::vector<double> sum(static_cast<std::size_t>(kc) + 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) sum[static_cast<std::size_t>(part.label(i))] += x[i];
  auto mean = [&](int id) { return sum[static_cast<std::size_t>(id)] / static_cast<double>(part.cluster_size(id)); };

  const bool k_first = mean(k) < mean(l) || (mean(k) == mean(l) && k < l);
  const int lo = k_first ? k : l;
  const int hi = k_first ? l : k;
  const double mlo = mean(lo), mhi = mean(hi);

  std::vector<std::pair<double, int>> inner;
  for (int id = 1; id <= kc; ++id) {
    if (id == k || id == l) continue;
    const double mid = mean(id);
    if (mid >= mlo && mid <= mhi) inner.emplace_back(mid, id);
  }
  std::sort(inner.begin(), inner.end());

  BetweenSet bs;
  bs.g = g;
  bs.k = k;
  bs.l = l;
  bs.ordered_clusters.push_back(lo);
  for (const auto& [m, id] : inner) bs.ordered_clusters.push_back(id);
  bs.ordered_clusters.push_back(hi);
  return bs;
}

std::vector<std::pair<int, int>> adjacent_pairs(const BetweenSet& bs) {
  std::vector<std::pair<int, int>> out;
  for (std::size_t i = 0; i + 1 < bs.ordered_clusters.size(); ++i) {
    out.emplace_back(bs.ordered_clusters[i], bs.ordered_clusters[i + 1]);
  }
  return out;
}

double variance_path(std::span<const double> x, const Partition& part, const BetweenSet& bs) {
  return union_variance(x, part, bs.ordered_clusters);
}

double harmonic_merge(std::span<const double> pvals) {
  if (pvals.empty()) throw std::invalid_argument("harmonic_merge: no p-values");
  for (double p : pvals) {
    if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("harmonic_merge: p-values must lie in (0, 1]");
  }
  if (pvals.size() == 1) return pvals.front();
  const double m1 = static_cast<double>(pvals.size());
  double inv = 0.0;
  for (double p : pvals) inv += 1.0 / p;
  return std::min(std::numbers::e * std::log(m1) * m1 / inv, 1.0);
}

std::uint64_t pair_seed(std::uint64_t master, std::size_t pair_index) {
  return pair_index == 0 ? master : derive_seed(master, pair_index);
}

PValueResult merged_selective_p_value(const DataMatrix& X, std::size_t g, const Partition& part, int k, int l,
                                      const Clusterer& clusterer, const SelectiveOptions& options) {
  if (g >= X.cols()) throw UsageError("variable index out of range");
  const auto x = X.column(g);
  const BetweenSet bs = between_set(x, part, k, l, g);

  SelectiveOptions sub = options;
  if (!sub.sigma_sq) {
    const double v = sub.variance == VarianceMode::pair ? variance_path(x, part, bs) : variance_all(x);
    if (!(v > 0.0)) throw DataError("degenerate variance on variable '" + X.column_names()[g] + "'");
    sub.sigma_sq = v;
  }

  PValueResult r;
  r.method = Method::merged;
  r.statistic = test_statistic(x, contrast_vector(part, k, l));
  r.sigma_sq = sub.sigma_sq;
  r.sample_size = X.rows();
  const auto pairs = adjacent_pairs(bs);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    sub.seed = pair_seed(options.seed, i);
    const PValueResult pr = selective_p_value(X, g, part, pairs[i].first, pairs[i].second, clusterer, sub);
    r.components.push_back(pr.p);
    r.n_samples += pr.n_samples;
    r.n_preserved += pr.n_preserved;
    if (pr.warning) {
      r.warning = true;
      if (!r.warning_text.empty()) r.warning_text += "; ";
      r.warning_text += "pair " + std::to_string(pairs[i].first) + "," + std::to_string(pairs[i].second) + ": " +
                        pr.warning_text;
    }
  }
  r.p = harmonic_merge(r.components);
  return r;
}

}  // namespace pcinf
