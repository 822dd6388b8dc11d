#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pcinf/clusterer.hpp"
#include "pcinf/data_matrix.hpp"
#include "pcinf/partition.hpp"
#include "pcinf/random.hpp"

namespace pcinf {

enum class Method { direct, merged, dip, ttest };

std::string_view method_name(Method m);
// Throws UsageError for an unknown name.
Method parse_method(std::string_view name);

// eta_i = 1/|Ck| on Ck, -1/|Cl| on Cl, 0 elsewhere.
struct ContrastVector {
  std::vector<double> eta;
  int k = 0;
  int l = 0;
  double norm_sq = 0.0;  // 1/|Ck| + 1/|Cl|
};

ContrastVector contrast_vector(const Partition& part, int k, int l);

// eta^T x, the difference of the two cluster means.
double test_statistic(std::span<const double> x, const ContrastVector& cv);

// Copy of X with column g moved along eta so that its statistic becomes phi:
// x_g - eta (x_g^T eta) / |eta|^2 + eta phi / |eta|^2.
DataMatrix perturb_column(const DataMatrix& X, std::size_t g, const ContrastVector& cv, double phi);

// Sum of squared deviations from the union mean over Ck and Cl, divided by
// |Ck| + |Cl| - 1.
double variance_pair(std::span<const double> x, const Partition& part, int k, int l);

// Sample variance (n - 1) of the whole column.
double variance_all(std::span<const double> x);

enum class VarianceMode { pair, all_observations };

struct PerturbationSample {
  double omega = 0.0;
  double log_weight = 0.0;
  double weight = 0.0;  // exp(log_weight), saturating at the largest double
  bool preserved = false;
  bool exceeds = false;  // |omega| >= |observed statistic|
};

struct PValueResult {
  double p = 1.0;
  double statistic = 0.0;
  Method method = Method::direct;
  std::size_t n_samples = 0;
  std::size_t n_preserved = 0;
  std::optional<double> sigma_sq;
  bool warning = false;
  std::string warning_text;
  // merged: adjacent-pair p-values in between-set order
  std::vector<double> components;
  // dip: number of observations the statistic was computed on
  std::size_t sample_size = 0;
};

struct SelectiveOptions {
  std::size_t n_samples = 2000;
  // Plug-in variance; estimated from the data when absent.
  std::optional<double> sigma_sq;
  VarianceMode variance = VarianceMode::pair;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
};

// Importance-sampled selective p-value for H0: mean(Ck) = mean(Cl) on column
// g, conditioning on `clusterer` reproducing Ck and Cl. `part` must be
// clusterer.cluster(X). Sample i draws from derive_seed(seed, i); the result
// does not depend on the thread count. Exchanging k and l leaves p unchanged.
// If `samples` is given it receives the N samples in index order.
PValueResult selective_p_value(const DataMatrix& X, std::size_t g, const Partition& part, int k, int l,
                               const Clusterer& clusterer, const SelectiveOptions& options,
                               std::vector<PerturbationSample>* samples = nullptr);

// Monte-Carlo estimate from already evaluated samples; floors at 1/(N+1).
double selective_estimate(std::span<const PerturbationSample> samples, std::size_t* n_preserved = nullptr);

enum class TTestKind { welch, pooled };

// Two-sided two-sample t-test of mean(Ck) = mean(Cl) on column x, ignoring
// that the clusters were estimated from the same data.
PValueResult t_test_p_value(std::span<const double> x, const Partition& part, int k, int l,
                            TTestKind kind = TTestKind::welch);

}  // namespace pcinf
