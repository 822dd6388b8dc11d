#pragma once

#include <span>

#include "pcinf/partition.hpp"

namespace pcinf {

// Sum of squared deviations from the grand mean over every row whose label
// is in `clusters`, divided by (row count - 1). Rows are visited in index
// order, so the result does not depend on the order of `clusters`.
double union_variance(std::span<const double> x, const Partition& part, std::span<const int> clusters);

}  // namespace pcinf
