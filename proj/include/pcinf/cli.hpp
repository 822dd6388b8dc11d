#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pcinf/data_matrix.hpp"
#include "pcinf/partition.hpp"
#include "pcinf/selective.hpp"

namespace pcinf {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

struct TestRequest {
  std::size_t k = 3;
  std::optional<std::pair<int, int>> pair;  // every pair when absent
  std::vector<std::string> variables;       // every column when empty
  std::vector<Method> methods = {Method::direct, Method::merged, Method::dip, Method::ttest};
  std::size_t mc_samples = 2000;
  std::size_t dip_reps = 2000;
  VarianceMode variance = VarianceMode::pair;
  TTestKind ttest = TTestKind::welch;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
};

struct TestCell {
  int k = 0;
  int l = 0;
  std::size_t variable = 0;
  std::string variable_name;
  Method method = Method::direct;
  std::optional<PValueResult> result;
  std::string error;
};

struct TestTable {
  Partition partition;
  // pairs by (k, l), then variables in column order, then canonical methods
  std::vector<TestCell> cells;
};

// Ward/Euclidean clustering cut at request.k followed by every requested
// test. Comparison c (pair-major, variable-minor) seeds its Monte-Carlo
// tests with derive_seed(seed, c). Per-cell failures are recorded, not
// thrown.
TestTable run_pairwise_tests(const DataMatrix& data, const TestRequest& request);

// Entry point of the pcinf tool; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pcinf
