#include "pcinf/clusterer.hpp"

#include <stdexcept>

#include "pcinf/clustering.hpp"

namespace pcinf {

bool Clusterer::preserves(const DataMatrix& m, const Partition& reference, int a, int b) const {
  return clusters_preserved(reference, a, b, cluster(m));
}

WardClusterer::WardClusterer(std::size_t k) : k_(k) {
  if (k_ < 1) throw std::invalid_argument("WardClusterer: K must be positive");
}

Partition WardClusterer::cluster(const DataMatrix& m) const { return ward_partition(m, k_); }

bool WardClusterer::preserves(const DataMatrix& m, const Partition& reference, int a, int b) const {
  return ward_preserves(m, k_, reference, a, b);
}

Partition FixedClusterer::cluster(const DataMatrix& m) const {
  if (m.rows() != partition_.size()) throw std::invalid_argument("FixedClusterer: row count mismatch");
  return partition_;
}

}  // namespace pcinf
