#include "pcinf/partition.hpp"

#include <map>
#include <stdexcept>
#include <string>

namespace pcinf {

Partition Partition::from_labels(std::vector<int> labels) {
  Partition p;
  int k_max = 0;
  for (int l : labels) {
    if (l < 1) throw std::invalid_argument("cluster ids must be >= 1");
    k_max = std::max(k_max, l);
  }
  p.members_.resize(static_cast<std::size_t>(k_max));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    p.members_[static_cast<std::size_t>(labels[i] - 1)].push_back(i);
  }
  for (int id = 1; id <= k_max; ++id) {
    if (p.members_[static_cast<std::size_t>(id - 1)].empty()) {
      throw std::invalid_argument("cluster " + std::to_string(id) + " is empty");
    }
  }
  p.labels_ = std::move(labels);
  return p;
}

Partition Partition::canonical(std::span<const int> raw_labels) {
  const auto n = static_cast<int>(raw_labels.size());
  bool dense = true;
  for (int raw : raw_labels) dense = dense && raw >= 0 && raw < 2 * n + 1;
  if (dense) {
    std::vector<int> remap(static_cast<std::size_t>(2 * n + 1), 0);
    std::vector<int> labels(raw_labels.size());
    int next = 0;
    for (std::size_t i = 0; i < raw_labels.size(); ++i) {
      int& id = remap[static_cast<std::size_t>(raw_labels[i])];
      if (id == 0) id = ++next;
      labels[i] = id;
    }
    return from_labels(std::move(labels));
  }
  std::map<int, int> remap;
  std::vector<int> labels;
  labels.reserve(raw_labels.size());
  for (int raw : raw_labels) {
    auto [it, inserted] = remap.try_emplace(raw, static_cast<int>(remap.size()) + 1);
    labels.push_back(it->second);
  }
  return from_labels(std::move(labels));
}

const std::vector<std::size_t>& Partition::members(int id) const {
  if (!has_cluster(id)) throw std::out_of_range("no cluster with id " + std::to_string(id));
  return members_[static_cast<std::size_t>(id - 1)];
}

namespace {

bool has_exact_cluster(const std::vector<std::size_t>& set, const Partition& candidate) {
  if (set.empty()) return false;
  const int target = candidate.label(set.front());
  for (auto i : set) {
    if (candidate.label(i) != target) return false;
  }
  return candidate.cluster_size(target) == set.size();
}

}  // namespace

bool clusters_preserved(const Partition& reference, int k, int l, const Partition& candidate) {
  if (reference.size() != candidate.size()) {
    throw std::invalid_argument("clusters_preserved: partitions over different n");
  }
  return has_exact_cluster(reference.members(k), candidate) &&
         has_exact_cluster(reference.members(l), candidate);
}

}  // namespace pcinf
