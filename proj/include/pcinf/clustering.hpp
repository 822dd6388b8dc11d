#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pcinf/data_matrix.hpp"
#include "pcinf/partition.hpp"

namespace pcinf {

// Dense symmetric n x n matrix with zero diagonal.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), d_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    d_[i * n_ + j] = v;
    d_[j * n_ + i] = v;
  }
  std::span<const double> raw() const { return d_; }
  std::vector<double>& raw_mutable() { return d_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> d_;
};

DistanceMatrix euclidean_distance_matrix(const DataMatrix& m);
DistanceMatrix squared_euclidean_distance_matrix(const DataMatrix& m);

// One agglomeration step. Leaves are nodes 0..n-1; the merge at step s
// creates node n+s. left < right.
struct Merge {
  std::size_t left = 0;
  std::size_t right = 0;
  double height = 0.0;
};

struct Dendrogram {
  std::size_t leaf_count = 0;
  std::vector<Merge> merges;  // in the order they were performed
};

// Ward linkage in the "Ward.D2" convention: Lance-Williams updates on squared
// Euclidean distances, heights reported as square roots. At every step the
// pair with the smallest dissimilarity is merged; exact ties go to the
// lexicographically smallest (left node id, right node id).
// `sizes` gives initial cluster weights (all ones when empty).
Dendrogram ward_linkage(const DistanceMatrix& d, std::span<const double> sizes = {});

// The K clusters left after undoing the last K-1 merges. Ids 1..K follow
// each cluster's smallest row index.
Partition cut(const Dendrogram& dendrogram, std::size_t k);

// Ward.D2 linkage of the rows of m computed from cluster centroids with the
// nearest-neighbour chain algorithm; merges are stably ordered by height.
// Agrees with ward_linkage(euclidean_distance_matrix(m)) up to rounding in
// near-tied dissimilarities.
Dendrogram ward_linkage(const DataMatrix& m);

// Ward/Euclidean clustering of the rows of m cut at k clusters.
Partition ward_partition(const DataMatrix& m, std::size_t k);

// clusters_preserved(reference, a, b, ward_partition(m, k)).
bool ward_preserves(const DataMatrix& m, std::size_t k, const Partition& reference, int a, int b);

std::string dendrogram_to_json(const Dendrogram& dendrogram);

}  // namespace pcinf
