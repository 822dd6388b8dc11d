#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "pcinf/clusterer.hpp"
#include "pcinf/selective.hpp"

namespace pcinf {

// Clusters whose mean on variable g lies in the closed interval spanned by
// the means of Ck and Cl, ascending by mean (ties by id). The endpoint with
// the smaller mean comes first and the other endpoint last.
struct BetweenSet {
  std::vector<int> ordered_clusters;
  std::size_t g = 0;
  int k = 0;
  int l = 0;

  std::size_t size() const { return ordered_clusters.size(); }
};

BetweenSet between_set(std::span<const double> x, const Partition& part, int k, int l, std::size_t g = 0);

// The size() - 1 consecutive pairs of the between-set.
std::vector<std::pair<int, int>> adjacent_pairs(const BetweenSet& bs);

// Variance over every observation of every cluster in the set; equals
// variance_pair when the set is {Ck, Cl}.
double variance_path(std::span<const double> x, const Partition& part, const BetweenSet& bs);

// A single p-value passes through; otherwise
// min(e ln(M-1) (M-1) / sum(1/p_i), 1) with M-1 inputs.
double harmonic_merge(std::span<const double> pvals);

// Seed for the i-th adjacent-pair sub-test. Pair 0 uses the master seed so
// that a two-cluster between-set reproduces the direct test exactly.
std::uint64_t pair_seed(std::uint64_t master, std::size_t pair_index);

// Selective tests on each adjacent pair between Ck and Cl with a shared
// variance (variance_path unless options.sigma_sq is set), combined by
// harmonic_merge. Per-pair p-values go to `components`.
PValueResult merged_selective_p_value(const DataMatrix& X, std::size_t g, const Partition& part, int k, int l,
                                      const Clusterer& clusterer, const SelectiveOptions& options);

}  // namespace pcinf
