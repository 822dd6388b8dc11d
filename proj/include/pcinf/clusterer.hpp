#pragma once

#include <cstddef>

#include "pcinf/data_matrix.hpp"
#include "pcinf/partition.hpp"

namespace pcinf {

// A clustering method c(): DataMatrix -> Partition with a fixed number of
// clusters. Implementations must be deterministic and safe to call
// concurrently from several threads.
class Clusterer {
 public:
  virtual ~Clusterer() = default;

  virtual Partition cluster(const DataMatrix& m) const = 0;

  // Whether clustering m reproduces clusters a and b of reference as exact
  // member sets. Override when the method can answer faster than a full run.
  virtual bool preserves(const DataMatrix& m, const Partition& reference, int a, int b) const;
};

// Hierarchical clustering, Ward.D2 linkage on Euclidean distance, cut at K.
class WardClusterer final : public Clusterer {
 public:
  explicit WardClusterer(std::size_t k);

  std::size_t k() const { return k_; }
  Partition cluster(const DataMatrix& m) const override;
  bool preserves(const DataMatrix& m, const Partition& reference, int a, int b) const override;

 private:
  std::size_t k_;
};

// Returns the same partition whatever the data. Every perturbation is
// therefore "preserved"; useful as a reference point for the selective test.
class FixedClusterer final : public Clusterer {
 public:
  explicit FixedClusterer(Partition partition) : partition_(std::move(partition)) {}

  Partition cluster(const DataMatrix& m) const override;

 private:
  Partition partition_;
};

}  // namespace pcinf
