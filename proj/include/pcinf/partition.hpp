#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pcinf {

// Assignment of n rows to K disjoint, nonempty clusters with ids 1..K.
class Partition {
 public:
  Partition() = default;

  // labels must use every id in 1..K at least once.
  static Partition from_labels(std::vector<int> labels);
  // Renumbers arbitrary integer labels 1..K in order of each cluster's
  // smallest row index.
  static Partition canonical(std::span<const int> raw_labels);

  std::size_t size() const { return labels_.size(); }
  int cluster_count() const { return static_cast<int>(members_.size()); }
  int label(std::size_t row) const { return labels_[row]; }
  std::span<const int> labels() const { return labels_; }
  // Row indices of cluster `id` (1-based), ascending.
  const std::vector<std::size_t>& members(int id) const;
  std::size_t cluster_size(int id) const { return members(id).size(); }
  bool has_cluster(int id) const { return id >= 1 && id <= cluster_count(); }

  friend bool operator==(const Partition& a, const Partition& b) { return a.labels_ == b.labels_; }

 private:
  std::vector<int> labels_;
  std::vector<std::vector<std::size_t>> members_;
};

// True iff `candidate` has a cluster whose member set equals that of
// reference cluster k, and one equal to reference cluster l.
bool clusters_preserved(const Partition& reference, int k, int l, const Partition& candidate);

}  // namespace pcinf
