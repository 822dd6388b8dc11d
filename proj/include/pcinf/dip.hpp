#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "pcinf/data_matrix.hpp"
#include "pcinf/partition.hpp"
#include "pcinf/random.hpp"
#include "pcinf/selective.hpp"

namespace pcinf {

struct DipResult {
  double dip = 0.0;  // in [1/(2n), 1/4]
  std::size_t n = 0;
  double p = 1.0;
  // 0-based indices into the sorted sample bounding the modal interval
  std::size_t modal_lower = 0;
  std::size_t modal_upper = 0;
};

// Hartigan's dip of the empirical CDF of an ascending sample: the sup-norm
// distance to the nearest unimodal CDF, floored at 1/(2n). Throws
// std::invalid_argument for n < 2 or an unsorted sample.
DipResult dip_statistic(std::span<const double> sorted);

// Sorted dips of B Uniform(0,1) samples of size n; replicate b is drawn from
// derive_seed(seed, b).
std::vector<double> dip_null_distribution(std::size_t n, std::size_t B, std::uint64_t seed, unsigned threads = 1);

// (1 + #{null dips >= dip_obs}) / (B + 1) over a sorted null distribution.
double dip_p_value(double dip_obs, std::span<const double> sorted_null);
double dip_p_value(double dip_obs, std::size_t n, std::size_t B, std::uint64_t seed);

// Thread-safe cache of null distributions keyed by sample size, for one
// (B, seed) calibration.
class DipCalibration {
 public:
  DipCalibration(std::size_t B, std::uint64_t seed, unsigned threads = 1) : B_(B), seed_(seed), threads_(threads) {}

  std::size_t replicates() const { return B_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<double>& null_distribution(std::size_t n);
  double p_value(double dip_obs, std::size_t n) { return dip_p_value(dip_obs, null_distribution(n)); }

 private:
  std::size_t B_;
  std::uint64_t seed_;
  unsigned threads_;
  std::mutex mutex_;
  std::map<std::size_t, std::shared_ptr<const std::vector<double>>> cache_;
};

// Dip test on variable g restricted to the rows of every cluster in the
// between-set of (k, l).
PValueResult dip_test_between(const DataMatrix& X, std::size_t g, const Partition& part, int k, int l,
                              DipCalibration& calibration);
PValueResult dip_test_between(const DataMatrix& X, std::size_t g, const Partition& part, int k, int l,
                              std::size_t B, std::uint64_t seed);

}  // namespace pcinf
