#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "pcinf/clustering.hpp"

namespace pcinf {

namespace {

DistanceMatrix squared_distances(const DataMatrix& m) {
  const std::size_t n = m.rows();
  DistanceMatrix out(n);
  auto& d = out.raw_mutable();
  for (std::size_t j = 0; j < m.cols(); ++j) {
    const auto col = m.column(j);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double xi = col[i];
      double* row = d.data() + i * n;
      for (std::size_t k = i + 1; k < n; ++k) {
        const double diff = xi - col[k];
        row[k] += diff * diff;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) d[k * n + i] = d[i * n + k];
  }
  return out;
}

double row_min(const double* v, std::size_t n) {
  double best = std::numeric_limits<double>::infinity();
#pragma omp simd reduction(min : best)
  for (std::size_t j = 0; j < n; ++j) best = v[j] < best ? v[j] : best;
  return best;
}

double count_equal(const double* v, std::size_t n, double x) {
  double c = 0.0;
#pragma omp simd reduction(+ : c)
  for (std::size_t j = 0; j < n; ++j) c += v[j] == x ? 1.0 : 0.0;
  return c;
}

// Primitive agglomeration with a per-row nearest-neighbour cache. `d` holds
// squared dissimilarities (n x n, overwritten); retired slots and the
// diagonal are +inf so rows can be scanned and updated without branching.
// After each merge is chosen, observe(step, slot_a, slot_b, node_a, node_b,
// squared_height) is called; returning false stops the loop.
template <class Observer>
void agglomerate(std::vector<double>& d, std::size_t n, std::vector<double> weight,
                 std::size_t n_merges, Observer&& observe) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> node(n);
  std::iota(node.begin(), node.end(), std::size_t{0});
  std::vector<std::size_t> nn(n, 0);
  std::vector<double> nnd(n, inf);
  for (std::size_t i = 0; i < n; ++i) d[i * n + i] = inf;

  // ordering of two candidate pairs with equal dissimilarity
  auto key_less = [&](std::size_t i, std::size_t j, std::size_t p, std::size_t q) {
    const auto a0 = std::min(node[i], node[j]), a1 = std::max(node[i], node[j]);
    const auto b0 = std::min(node[p], node[q]), b1 = std::max(node[p], node[q]);
    return a0 != b0 ? a0 < b0 : a1 < b1;
  };

  auto scan = [&](std::size_t i) {
    const double* row = d.data() + i * n;
    const double best = row_min(row, n);
    std::size_t arg = 0;
    while (row[arg] != best) ++arg;
    if (count_equal(row, n, best) > 1.0) {
      for (std::size_t j = arg + 1; j < n; ++j) {
        if (row[j] == best && key_less(i, j, i, arg)) arg = j;
      }
    }
    nn[i] = arg;
    nnd[i] = best;
  };

  for (std::size_t i = 0; i < n; ++i) scan(i);

  for (std::size_t step = 0; step < n_merges; ++step) {
    const double best = row_min(nnd.data(), n);
    std::size_t a = 0;
    while (nnd[a] != best) ++a;
    // a mutual nearest-neighbour pair shows up twice
    if (count_equal(nnd.data(), n, best) > 2.0) {
      for (std::size_t i = a + 1; i < n; ++i) {
        if (nnd[i] == best && key_less(i, nn[i], a, nn[a])) a = i;
      }
    }
    const std::size_t b = nn[a];
    const double dab = best;
    if (!observe(step, a, b, node[a], node[b], dab)) return;

    const double wa = weight[a];
    const double wb = weight[b];
    double* row_a = d.data() + a * n;
    double* row_b = d.data() + b * n;
    const double* w = weight.data();
    // inf entries (retired slots, the diagonal, and slot b) stay inf
    for (std::size_t k = 0; k < n; ++k) {
      const double wk = w[k];
      row_a[k] = ((wa + wk) * row_a[k] + (wb + wk) * row_b[k] - wk * dab) / (wa + wb + wk);
    }
    row_a[a] = inf;
    row_a[b] = inf;
    for (std::size_t k = 0; k < n; ++k) {
      d[k * n + a] = row_a[k];
      d[k * n + b] = inf;
    }
    weight[a] = wa + wb;
    node[a] = n + step;
    nnd[b] = inf;

    scan(a);
    for (std::size_t k = 0; k < n; ++k) {
      if (k == a || nnd[k] == inf) continue;
      if (nn[k] == a || nn[k] == b) {
        scan(k);
      } else {
        const double v = row_a[k];
        if (v < nnd[k] || (v == nnd[k] && key_less(k, a, k, nn[k]))) {
          nn[k] = a;
          nnd[k] = v;
        }
      }
    }
  }
}

// Ward.D2 squared dissimilarity from cluster t to every active cluster q,
// written to out; returns the minimum over q != t. The weight factor is
// formed symmetrically so d(t, q) and d(q, t) agree bitwise.
template <std::size_t P>
double chain_scan_fixed(const double* cen, std::size_t stride, const double* w, std::size_t m,
                        std::size_t t, double* out) {
  double ct[P];
  for (std::size_t c = 0; c < P; ++c) ct[c] = cen[c * stride + t];
  const double wt = w[t];
  double best = std::numeric_limits<double>::infinity();
#pragma omp simd reduction(min : best)
  for (std::size_t q = 0; q < m; ++q) {
    double s = 0.0;
    for (std::size_t c = 0; c < P; ++c) {
      const double diff = ct[c] - cen[c * stride + q];
      s += diff * diff;
    }
    const double v = 2.0 * ((wt * w[q]) / (wt + w[q])) * s;
    out[q] = v;
    const double cand = q == t ? std::numeric_limits<double>::infinity() : v;
    best = cand < best ? cand : best;
  }
  return best;
}

double chain_scan(const double* cen, std::size_t stride, std::size_t p, const double* w, std::size_t m,
                  std::size_t t, double* out) {
  switch (p) {
    case 1: return chain_scan_fixed<1>(cen, stride, w, m, t, out);
    case 2: return chain_scan_fixed<2>(cen, stride, w, m, t, out);
    case 3: return chain_scan_fixed<3>(cen, stride, w, m, t, out);
    case 4: return chain_scan_fixed<4>(cen, stride, w, m, t, out);
    default: break;
  }
  const double wt = w[t];
  std::fill_n(out, m, 0.0);
  for (std::size_t c = 0; c < p; ++c) {
    const double* col = cen + c * stride;
    const double x = col[t];
#pragma omp simd
    for (std::size_t q = 0; q < m; ++q) {
      const double diff = x - col[q];
      out[q] += diff * diff;
    }
  }
  double best = std::numeric_limits<double>::infinity();
#pragma omp simd reduction(min : best)
  for (std::size_t q = 0; q < m; ++q) {
    const double v = 2.0 * ((wt * w[q]) / (wt + w[q])) * out[q];
    out[q] = v;
    const double cand = q == t ? std::numeric_limits<double>::infinity() : v;
    best = cand < best ? cand : best;
  }
  return best;
}

// Nearest-neighbour chain on centroids. Ward is reducible, so the merges
// found here, stably sorted by height, are the greedy agglomeration.
// Active clusters occupy positions 0..m-1 of the centroid columns.
struct ChainMerge {
  std::size_t a = 0;  // smallest leaf in each input cluster
  std::size_t b = 0;
  double d2 = 0.0;
};

std::vector<ChainMerge> nn_chain(const DataMatrix& x) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  std::vector<double> cen(n * p);
  for (std::size_t c = 0; c < p; ++c) {
    const auto col = x.column(c);
    std::copy(col.begin(), col.end(), cen.begin() + static_cast<std::ptrdiff_t>(c * n));
  }
  std::vector<double> w(n, 1.0), tmp(n);
  std::vector<std::size_t> rep(n);
  std::iota(rep.begin(), rep.end(), std::size_t{0});
  std::vector<std::size_t> chain;
  chain.reserve(n);
  std::vector<ChainMerge> out;
  out.reserve(n - 1);

  std::size_t m = n;
  while (m > 1) {
    if (chain.empty()) chain.push_back(0);
    for (;;) {
      const std::size_t t = chain.back();
      const bool has_prev = chain.size() >= 2;
      const std::size_t prev = has_prev ? chain[chain.size() - 2] : 0;
      const double best = chain_scan(cen.data(), n, p, w.data(), m, t, tmp.data());
      const double* acc = tmp.data();
      std::size_t arg = 0;
      if (has_prev && acc[prev] == best) {
        arg = prev;
      } else {
        while (acc[arg] != best || arg == t) ++arg;
      }
      if (has_prev && arg == prev) {
        chain.pop_back();
        chain.pop_back();
        const std::size_t i = std::min(t, prev);
        const std::size_t j = std::max(t, prev);
        out.push_back({rep[i], rep[j], best});
        const double wi = w[i], wj = w[j], ws = wi + wj;
        for (std::size_t c = 0; c < p; ++c) {
          double* col = cen.data() + c * n;
          col[i] = (wi * col[i] + wj * col[j]) / ws;
        }
        w[i] = ws;
        rep[i] = std::min(rep[i], rep[j]);
        const std::size_t last = m - 1;
        if (j != last) {
          for (std::size_t c = 0; c < p; ++c) cen[c * n + j] = cen[c * n + last];
          w[j] = w[last];
          rep[j] = rep[last];
          for (auto& e : chain) {
            if (e == last) e = j;
          }
        }
        --m;
        break;
      }
      chain.push_back(arg);
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ChainMerge& l, const ChainMerge& r) { return l.d2 < r.d2; });
  return out;
}

Partition cut_chain(std::size_t n, std::span<const ChainMerge> merges) {
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  for (const auto& mg : merges) {
    const auto ra = find(mg.a), rb = find(mg.b);
    parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::vector<int> raw(n);
  for (std::size_t i = 0; i < n; ++i) raw[i] = static_cast<int>(find(i));
  return Partition::canonical(raw);
}

Dendrogram linkage_from_squared(DistanceMatrix sq, std::vector<double> weight, std::size_t n_merges) {
  const std::size_t n = sq.size();
  Dendrogram out;
  out.leaf_count = n;
  out.merges.reserve(n_merges);
  agglomerate(sq.raw_mutable(), n, std::move(weight), n_merges,
              [&](std::size_t, std::size_t, std::size_t, std::size_t na, std::size_t nb, double h2) {
                out.merges.push_back({std::min(na, nb), std::max(na, nb), std::sqrt(std::max(h2, 0.0))});
                return true;
              });
  return out;
}

Partition cut_merges(std::size_t n, std::span<const Merge> merges) {
  std::vector<std::size_t> parent(n + merges.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (std::size_t s = 0; s < merges.size(); ++s) {
    parent[find(merges[s].left)] = n + s;
    parent[find(merges[s].right)] = n + s;
  }
  std::vector<int> raw(n);
  for (std::size_t i = 0; i < n; ++i) raw[i] = static_cast<int>(find(i));
  return Partition::canonical(raw);
}

}  // namespace

DistanceMatrix squared_euclidean_distance_matrix(const DataMatrix& m) { return squared_distances(m); }

DistanceMatrix euclidean_distance_matrix(const DataMatrix& m) {
  DistanceMatrix d = squared_distances(m);
  for (double& v : d.raw_mutable()) v = std::sqrt(v);
  return d;
}

Dendrogram ward_linkage(const DistanceMatrix& d, std::span<const double> sizes) {
  const std::size_t n = d.size();
  if (n < 2) throw std::invalid_argument("ward_linkage needs at least two observations");
  std::vector<double> weight(n, 1.0);
  if (!sizes.empty()) {
    if (sizes.size() != n) throw std::invalid_argument("ward_linkage: sizes length mismatch");
    weight.assign(sizes.begin(), sizes.end());
  }
  DistanceMatrix sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) sq.set(i, j, d(i, j) * d(i, j));
  }
  return linkage_from_squared(std::move(sq), std::move(weight), n - 1);
}

Partition cut(const Dendrogram& dendrogram, std::size_t k) {
  const std::size_t n = dendrogram.leaf_count;
  if (k < 1 || k > n) throw std::invalid_argument("cut: K out of range");
  if (dendrogram.merges.size() < n - k) throw std::invalid_argument("cut: dendrogram too short");
  return cut_merges(n, std::span(dendrogram.merges).first(n - k));
}

Partition ward_partition(const DataMatrix& m, std::size_t k) {
  const std::size_t n = m.rows();
  if (k < 1 || k > n) throw std::invalid_argument("ward_partition: K out of range");
  if (n == 1) return Partition::from_labels({1});
  const auto merges = nn_chain(m);
  return cut_chain(n, std::span(merges).first(n - k));
}

bool ward_preserves(const DataMatrix& m, std::size_t k, const Partition& reference, int a, int b) {
  if (reference.size() != m.rows()) throw std::invalid_argument("ward_preserves: size mismatch");
  return clusters_preserved(reference, a, b, ward_partition(m, k));
}

Dendrogram ward_linkage(const DataMatrix& m) {
  const std::size_t n = m.rows();
  if (n < 2) throw std::invalid_argument("ward_linkage needs at least two observations");
  const auto merges = nn_chain(m);
  // relabel leaf representatives to node ids in sorted merge order
  std::vector<std::size_t> parent(n), node(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::iota(node.begin(), node.end(), std::size_t{0});
  auto find = [&](std::size_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  Dendrogram out;
  out.leaf_count = n;
  out.merges.reserve(n - 1);
  for (std::size_t s = 0; s < merges.size(); ++s) {
    const auto ra = find(merges[s].a), rb = find(merges[s].b);
    const auto na = node[ra], nb = node[rb];
    out.merges.push_back({std::min(na, nb), std::max(na, nb), std::sqrt(std::max(merges[s].d2, 0.0))});
    const auto root = std::min(ra, rb);
    parent[std::max(ra, rb)] = root;
    node[root] = n + s;
  }
  return out;
}

std::string dendrogram_to_json(const Dendrogram& dendrogram) {
  nlohmann::json j;
  j["leaf_count"] = dendrogram.leaf_count;
  j["merges"] = nlohmann::json::array();
  for (const auto& m : dendrogram.merges) {
    j["merges"].push_back({{"left", m.left}, {"right", m.right}, {"height", m.height}});
  }
  return j.dump(2);
}

}  // namespace pcinf
