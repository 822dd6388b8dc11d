#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "pcinf/data_matrix.hpp"
#include "pcinf/random.hpp"

namespace pcinf {

// Simulated data with the generating group of every row. The group labels
// are for checking generators only; the harness never passes them on.
struct LabeledData {
  DataMatrix data;
  std::vector<int> truth;
};

// n x p i.i.d. N(0, 1).
DataMatrix gen_null_gaussian(std::size_t n, std::size_t p, Rng& rng);

// Three bivariate unit-variance Gaussian groups centred at (-5, 0), (5, 0)
// and (0, 10), n_per_cluster rows each, in group order.
LabeledData gen_three_clusters(std::size_t n_per_cluster, Rng& rng);

// n x 1 draws from 0.5 N(0, 1) + 0.5 N(delta, 1).
DataMatrix gen_contamination(std::size_t n, double delta, Rng& rng);

// Three groups separated on X1 only (means 0, delta, delta / 2), X2 pure
// noise; group sizes differ by at most one.
LabeledData gen_intervening(std::size_t n, double delta, Rng& rng);

enum class Distribution { gaussian, student_t5, uniform, exponential, laplace, logistic, beta22 };

std::string_view distribution_name(Distribution d);
// Throws UsageError for an unknown name.
Distribution parse_distribution(std::string_view name);
const std::vector<Distribution>& all_distributions();

// n x p i.i.d. draws from a unimodal distribution.
DataMatrix gen_robustness(std::size_t n, std::size_t p, Distribution d, Rng& rng);

}  // namespace pcinf
