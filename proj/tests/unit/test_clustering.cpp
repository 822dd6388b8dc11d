#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "../common/penguins.hpp"
#include "pcinf/clusterer.hpp"
#include "pcinf/clustering.hpp"
#include "pcinf/dataset.hpp"
#include "pcinf/random.hpp"

using namespace pcinf;

namespace {

DataMatrix random_matrix(std::size_t n, std::size_t p, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> z;
  std::vector<std::string> names;
  for (std::size_t j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
  DataMatrix m(n, names);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) m(i, j) = z(rng);
  return m;
}

struct NaiveWard {
  std::vector<double> heights;
  std::vector<std::vector<int>> labels_at_k;  // index k
};

// Recomputes every between-cluster Ward distance from centroids at each step.
NaiveWard naive_ward(const DataMatrix& m) {
  const std::size_t n = m.rows();
  std::vector<std::vector<std::size_t>> clusters(n);
  for (std::size_t i = 0; i < n; ++i) clusters[i] = {i};
  NaiveWard out;
  out.labels_at_k.resize(n + 1);
  auto snapshot = [&] {
    std::vector<int> lab(n);
    for (std::size_t c = 0; c < clusters.size(); ++c)
      for (std::size_t i : clusters[c]) lab[i] = static_cast<int>(c);
    out.labels_at_k[clusters.size()] = lab;
  };
  snapshot();
  while (clusters.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t ba = 0, bb = 0;
    for (std::size_t a = 0; a < clusters.size(); ++a) {
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        const double na = static_cast<double>(clusters[a].size());
        const double nb = static_cast<double>(clusters[b].size());
        double d = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
          double ca = 0.0, cb = 0.0;
          for (std::size_t i : clusters[a]) ca += m(i, j);
          for (std::size_t i : clusters[b]) cb += m(i, j);
          const double diff = ca / na - cb / nb;
          d += diff * diff;
        }
        d *= 2.0 * na * nb / (na + nb);
        if (d < best) {
          best = d;
          ba = a;
          bb = b;
        }
      }
    }
    out.heights.push_back(std::sqrt(best));
    clusters[ba].insert(clusters[ba].end(), clusters[bb].begin(), clusters[bb].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bb));
    snapshot();
  }
  return out;
}

std::vector<double> heights(const Dendrogram& d) {
  std::vector<double> h;
  for (const Merge& mg : d.merges) h.push_back(mg.height);
  return h;
}

}  // namespace

TEST(Distance, Examples) {
  const DataMatrix a = DataMatrix::from_rows({{0, 0}, {3, 4}, {3, 4}});
  const DistanceMatrix d = euclidean_distance_matrix(a);
  EXPECT_DOUBLE_EQ(d(0, 1), 5.0);
  EXPECT_DOUBLE_EQ(d(1, 2), 0.0);
  const DistanceMatrix e = euclidean_distance_matrix(DataMatrix::from_rows({{0}, {1}, {4}}));
  EXPECT_DOUBLE_EQ(e(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(e(0, 2), 4.0);
  EXPECT_DOUBLE_EQ(e(1, 2), 3.0);
  EXPECT_DOUBLE_EQ(e(2, 1), 3.0);
  EXPECT_DOUBLE_EQ(squared_euclidean_distance_matrix(a)(0, 1), 25.0);
}

TEST(Ward, TwoPointsMergeAtTheirDistance) {
  const DataMatrix m = DataMatrix::from_rows({{0, 0}, {3, 4}});
  const Dendrogram d = ward_linkage(euclidean_distance_matrix(m));
  ASSERT_EQ(d.merges.size(), 1u);
  EXPECT_DOUBLE_EQ(d.merges[0].height, 5.0);
  EXPECT_DOUBLE_EQ(ward_linkage(m).merges[0].height, 5.0);
}

TEST(Ward, TightPairsMergeFirst) {
  const DataMatrix m = DataMatrix::from_rows({{0, 0}, {0.1, 0}, {10, 10}, {10, 10.2}});
  for (const Dendrogram& d : {ward_linkage(euclidean_distance_matrix(m)), ward_linkage(m)}) {
    ASSERT_EQ(d.merges.size(), 3u);
    std::set<std::pair<std::size_t, std::size_t>> first = {{d.merges[0].left, d.merges[0].right},
                                                           {d.merges[1].left, d.merges[1].right}};
    EXPECT_TRUE(first.count({0, 1}));
    EXPECT_TRUE(first.count({2, 3}));
  }
}

TEST(Ward, ThreeCollinearPoints) {
  // 0, 1, 10: merge {0,1} at 1, then {0,1} with 10 at sqrt(2*2/3*9.5^2)
  const DataMatrix m = DataMatrix::from_rows({{0}, {1}, {10}});
  const Dendrogram d = ward_linkage(euclidean_distance_matrix(m));
  ASSERT_EQ(d.merges.size(), 2u);
  EXPECT_EQ(d.merges[0].left, 0u);
  EXPECT_EQ(d.merges[0].right, 1u);
  EXPECT_DOUBLE_EQ(d.merges[0].height, 1.0);
  EXPECT_NEAR(d.merges[1].height, std::sqrt(4.0 / 3.0 * 9.5 * 9.5), 1e-12);
  EXPECT_EQ(d.merges[1].left, 2u);
  EXPECT_EQ(d.merges[1].right, 3u);
}

TEST(Ward, MatchesNaiveObjectiveOnRandomData) {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const std::size_t n = 3 + s % 12;
    const DataMatrix m = random_matrix(n, 1 + s % 3, 1000 + s);
    const NaiveWard ref = naive_ward(m);
    const std::vector<double> lw = heights(ward_linkage(euclidean_distance_matrix(m)));
    const std::vector<double> nc = heights(ward_linkage(m));
    ASSERT_EQ(lw.size(), ref.heights.size());
    for (std::size_t i = 0; i < lw.size(); ++i) {
      EXPECT_NEAR(lw[i], ref.heights[i], 1e-9);
      EXPECT_NEAR(nc[i], ref.heights[i], 1e-9);
    }
    for (std::size_t k = 1; k <= n; ++k) {
      const Partition expect = Partition::canonical(ref.labels_at_k[k]);
      EXPECT_EQ(ward_partition(m, k), expect) << "n=" << n << " k=" << k;
      EXPECT_EQ(cut(ward_linkage(euclidean_distance_matrix(m)), k), expect);
    }
  }
}

TEST(Ward, CutExtremes) {
  const DataMatrix m = random_matrix(9, 2, 5);
  const Dendrogram d = ward_linkage(euclidean_distance_matrix(m));
  const Partition all = cut(d, 9);
  EXPECT_EQ(all.cluster_count(), 9);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(all.label(i), static_cast<int>(i) + 1);
  const Partition one = cut(d, 1);
  EXPECT_EQ(one.cluster_count(), 1);
  for (std::size_t k = 1; k <= 9; ++k) {
    const Partition p = cut(d, k);
    EXPECT_EQ(p.cluster_count(), static_cast<int>(k));
    std::size_t total = 0;
    for (int id = 1; id <= p.cluster_count(); ++id) total += p.cluster_size(id);
    EXPECT_EQ(total, 9u);
  }
  EXPECT_EQ(ward_partition(m, 9).cluster_count(), 9);
  EXPECT_EQ(ward_partition(m, 1).cluster_count(), 1);
}

TEST(Ward, Deterministic) {
  const DataMatrix m = random_matrix(60, 3, 17);
  const Dendrogram a = ward_linkage(m);
  const Dendrogram b = ward_linkage(m);
  ASSERT_EQ(a.merges.size(), b.merges.size());
  for (std::size_t i = 0; i < a.merges.size(); ++i) {
    EXPECT_EQ(a.merges[i].left, b.merges[i].left);
    EXPECT_EQ(a.merges[i].right, b.merges[i].right);
    EXPECT_EQ(a.merges[i].height, b.merges[i].height);
  }
  EXPECT_EQ(dendrogram_to_json(a), dendrogram_to_json(b));
  EXPECT_EQ(ward_partition(m, 4), ward_partition(m, 4));
}

TEST(Ward, RowPermutationInvariance) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const std::size_t n = 5 + s;
    const DataMatrix m = random_matrix(n, 2, 300 + s);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(s);
    std::shuffle(perm.begin(), perm.end(), rng);
    const DataMatrix pm = m.select_rows(perm);
    for (std::size_t k : {2u, 3u, 4u}) {
      const Partition pp = ward_partition(pm, k);
      std::vector<int> back(n);
      for (std::size_t i = 0; i < n; ++i) back[perm[i]] = pp.label(i);
      EXPECT_EQ(Partition::canonical(back), ward_partition(m, k));
    }
  }
}

TEST(Ward, LinkageFromDataAgreesWithMatrixPath) {
  const DataMatrix m = random_matrix(80, 2, 99);
  const Dendrogram a = ward_linkage(euclidean_distance_matrix(m));
  const Dendrogram b = ward_linkage(m);
  for (std::size_t k : {2u, 3u, 5u, 10u}) EXPECT_EQ(cut(a, k), cut(b, k));
}

TEST(Partition, CanonicalAndPreserved) {
  const std::vector<int> raw = {7, 7, 3, 9, 3};
  const Partition p = Partition::canonical(raw);
  EXPECT_EQ(p.cluster_count(), 3);
  EXPECT_EQ(p.label(0), 1);
  EXPECT_EQ(p.label(2), 2);
  EXPECT_EQ(p.label(3), 3);
  EXPECT_EQ(p.members(2), (std::vector<std::size_t>{2, 4}));

  const Partition ref = Partition::from_labels({1, 1, 2, 2, 3, 3, 3});
  EXPECT_TRUE(clusters_preserved(ref, 1, 2, ref));
  const Partition merged = Partition::from_labels({1, 1, 1, 1, 2, 2, 2});
  EXPECT_FALSE(clusters_preserved(ref, 1, 2, merged));
  const Partition reshuffled = Partition::from_labels({2, 2, 1, 1, 3, 4, 4});
  EXPECT_TRUE(clusters_preserved(ref, 1, 2, reshuffled));
  EXPECT_FALSE(clusters_preserved(ref, 1, 3, reshuffled));
  for (int k = 1; k <= 3; ++k)
    for (int l = 1; l <= 3; ++l) EXPECT_TRUE(clusters_preserved(ref, k, l, ref));
}

TEST(Clusterer, PreservesAgreesWithFullRun) {
  const DataMatrix m = random_matrix(40, 2, 3);
  const WardClusterer ward(3);
  const Partition ref = ward.cluster(m);
  EXPECT_TRUE(ward.preserves(m, ref, 1, 2));
  const DataMatrix other = random_matrix(40, 2, 4);
  EXPECT_EQ(ward.preserves(other, ref, 1, 2), clusters_preserved(ref, 1, 2, ward.cluster(other)));
  const FixedClusterer fixed(ref);
  EXPECT_EQ(fixed.cluster(other), ref);
  EXPECT_TRUE(fixed.preserves(other, ref, 2, 3));
}

TEST(Ward, PenguinsThreeClusters) {
  const DataMatrix x = zscale(testdata::penguins_complete());
  const Partition p = WardClusterer(3).cluster(x);
  ASSERT_EQ(p.cluster_count(), 3);
  EXPECT_EQ(p.cluster_size(1), 157u);
  EXPECT_EQ(p.cluster_size(2), 119u);
  EXPECT_EQ(p.cluster_size(3), 57u);
  const LabelColumn* species = x.label("species");
  ASSERT_NE(species, nullptr);
  std::map<int, std::map<std::string, int>> counts;
  for (std::size_t i = 0; i < x.rows(); ++i) ++counts[p.label(i)][*species->values[i]];
  EXPECT_EQ(counts[1]["Adelie"], 146);
  EXPECT_EQ(counts[1]["Chinstrap"], 11);
  EXPECT_EQ(counts[2]["Gentoo"], 119);
  EXPECT_EQ(counts[2].size(), 1u);
  EXPECT_EQ(counts[3]["Chinstrap"], 57);
  EXPECT_EQ(counts[3].size(), 1u);
}
