#include "pcinf/dip.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "pcinf/error.hpp"
#include "pcinf/merging.hpp"
#include "pcinf/parallel.hpp"

namespace pcinf {

namespace {

// Greatest convex minorant / least concave majorant iteration over a shrinking
// modal interval. Arrays are 1-based; the working dip is scaled by 2n until
// the end. Returns the scaled dip and the final (low, high).
struct DipCore {
  double dip2n = 1.0;
  long low = 1;
  long high = 1;
};

DipCore dip_core(const double* x0, long n, std::vector<long>& gcm, std::vector<long>& lcm, std::vector<long>& mn,
                 std::vector<long>& mj) {
  const double* x = x0 - 1;
  DipCore r;
  r.low = 1;
  r.high = n;
  r.dip2n = 1.0;
  if (n < 2 || x[n] == x[1]) return r;

  gcm.assign(static_cast<std::size_t>(n) + 2, 0);
  lcm.assign(static_cast<std::size_t>(n) + 2, 0);
  mn.assign(static_cast<std::size_t>(n) + 2, 0);
  mj.assign(static_cast<std::size_t>(n) + 2, 0);

  // index chains for the convex minorant
  mn[1] = 1;
  for (long j = 2; j <= n; ++j) {
    mn[j] = j - 1;
    for (;;) {
      const long mnj = mn[j];
      const long mnmnj = mn[mnj];
      if (mnj == 1 || (x[j] - x[mnj]) * static_cast<double>(mnj - mnmnj) <
                          (x[mnj] - x[mnmnj]) * static_cast<double>(j - mnj)) {
        break;
      }
      mn[j] = mnmnj;
    }
  }
  // index chains for the concave majorant
  mj[n] = n;
  for (long k = n - 1; k >= 1; --k) {
    mj[k] = k + 1;
    for (;;) {
      const long mjk = mj[k];
      const long mjmjk = mj[mjk];
      if (mjk == n || (x[k] - x[mjk]) * static_cast<double>(mjk - mjmjk) <
                          (x[mjk] - x[mjmjk]) * static_cast<double>(k - mjk)) {
        break;
      }
      mj[k] = mjmjk;
    }
  }

  for (;;) {
    long i = 1;
    gcm[1] = r.high;
    while (gcm[i] > r.low) {
      gcm[i + 1] = mn[gcm[i]];
      ++i;
    }
    const long l_gcm = i;
    long ig = l_gcm;
    long ix = ig - 1;

    i = 1;
    lcm[1] = r.low;
    while (lcm[i] < r.high) {
      lcm[i + 1] = mj[lcm[i]];
      ++i;
    }
    const long l_lcm = i;
    long ih = l_lcm;
    long iv = 2;

    // largest distance between the minorant and the majorant on [low, high]
    double d = 0.0;
    if (l_gcm != 2 || l_lcm != 2) {
      do {
        const long gcmix = gcm[ix];
        const long lcmiv = lcm[iv];
        if (gcmix > lcmiv) {
          const long gcmi1 = gcm[ix + 1];
          const long double dx =
              static_cast<long double>(lcmiv - gcmi1 + 1) -
              (static_cast<long double>(x[lcmiv]) - x[gcmi1]) * static_cast<long double>(gcmix - gcmi1) /
                  (x[gcmix] - x[gcmi1]);
          ++iv;
          if (dx >= d) {
            d = static_cast<double>(dx);
            ig = ix + 1;
            ih = iv - 1;
          }
        } else {
          const long lcmiv1 = lcm[iv - 1];
          const long double dx =
              (static_cast<long double>(x[gcmix]) - x[lcmiv1]) * static_cast<long double>(lcmiv - lcmiv1) /
                  (x[lcmiv] - x[lcmiv1]) -
              static_cast<long double>(gcmix - lcmiv1 - 1);
          --ix;
          if (dx >= d) {
            d = static_cast<double>(dx);
            ig = ix + 1;
            ih = iv;
          }
        }
        if (ix < 1) ix = 1;
        if (iv > l_lcm) iv = l_lcm;
      } while (gcm[ix] != lcm[iv]);
    } else {
      d = 1.0;
    }

    if (d < r.dip2n) break;

    // dip of the convex minorant on its retained part
    double dip_l = 0.0;
    for (long j = ig; j < l_gcm; ++j) {
      double max_t = 1.0;
      const long jb = gcm[j + 1], je = gcm[j];
      if (je - jb > 1 && x[je] != x[jb]) {
        const double c = static_cast<double>(je - jb) / (x[je] - x[jb]);
        for (long jj = jb; jj <= je; ++jj) {
          const double t = static_cast<double>(jj - jb + 1) - (x[jj] - x[jb]) * c;
          max_t = std::max(max_t, t);
        }
      }
      dip_l = std::max(dip_l, max_t);
    }
    // dip of the concave majorant on its retained part
    double dip_u = 0.0;
    for (long j = ih; j < l_lcm; ++j) {
      double max_t = 1.0;
      const long jb = lcm[j], je = lcm[j + 1];
      if (je - jb > 1 && x[je] != x[jb]) {
        const double c = static_cast<double>(je - jb) / (x[je] - x[jb]);
        for (long jj = jb; jj <= je; ++jj) {
          const double t = (x[jj] - x[jb]) * c - static_cast<double>(jj - jb - 1);
          max_t = std::max(max_t, t);
        }
      }
      dip_u = std::max(dip_u, max_t);
    }
    r.dip2n = std::max(r.dip2n, std::max(dip_l, dip_u));

    // no movement of the modal interval: converged
    if (r.low == gcm[ig] && r.high == lcm[ih]) break;
    r.low = gcm[ig];
    r.high = lcm[ih];
  }
  return r;
}

struct DipWork {
  std::vector<long> gcm, lcm, mn, mj;
};

double dip_value(std::span<const double> sorted, DipWork& w) {
  const auto n = static_cast<long>(sorted.size());
  return dip_core(sorted.data(), n, w.gcm, w.lcm, w.mn, w.mj).dip2n / (2.0 * static_cast<double>(n));
}

}  // namespace

DipResult dip_statistic(std::span<const double> sorted) {
  if (sorted.size() < 2) throw std::invalid_argument("dip_statistic needs at least two observations");
  if (!std::is_sorted(sorted.begin(), sorted.end())) throw std::invalid_argument("dip_statistic: sample not sorted");
  DipWork w;
  const auto n = static_cast<long>(sorted.size());
  const DipCore c = dip_core(sorted.data(), n, w.gcm, w.lcm, w.mn, w.mj);
  DipResult r;
  r.n = sorted.size();
  r.dip = c.dip2n / (2.0 * static_cast<double>(n));
  r.modal_lower = static_cast<std::size_t>(c.low - 1);
  r.modal_upper = static_cast<std::size_t>(c.high - 1);
  return r;
}

std::vector<double> dip_null_distribution(std::size_t n, std::size_t B, std::uint64_t seed, unsigned threads) {
  if (n < 2) throw std::invalid_argument("dip_null_distribution: n < 2");
  std::vector<double> dips(B);
  const std::size_t blocks = std::max<std::size_t>(1, std::min<std::size_t>(std::max(1u, threads), B));
  parallel_for(blocks, static_cast<unsigned>(blocks), [&](std::size_t blk) {
    DipWork w;
    std::vector<double> u(n);
    for (std::size_t b = blk * B / blocks; b < (blk + 1) * B / blocks; ++b) {
      Rng rng = make_rng(derive_seed(seed, b));
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      for (double& v : u) v = unif(rng);
      std::sort(u.begin(), u.end());
      dips[b] = dip_value(u, w);
    }
  });
  std::sort(dips.begin(), dips.end());
  return dips;
}

double dip_p_value(double dip_obs, std::span<const double> sorted_null) {
  const auto first_ge = std::lower_bound(sorted_null.begin(), sorted_null.end(), dip_obs);
  const auto count = static_cast<double>(sorted_null.end() - first_ge);
  return (1.0 + count) / (static_cast<double>(sorted_null.size()) + 1.0);
}

double dip_p_value(double dip_obs, std::size_t n, std::size_t B, std::uint64_t seed) {
  return dip_p_value(dip_obs, dip_null_distribution(n, B, seed));
}

const std::vector<double>& DipCalibration::null_distribution(std::size_t n) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(n); it != cache_.end()) return *it->second;
  }
  auto table = std::make_shared<const std::vector<double>>(dip_null_distribution(n, B_, seed_, threads_));
  std::lock_guard lock(mutex_);
  // a concurrent caller may have won; both tables are identical
  return *cache_.try_emplace(n, std::move(table)).first->second;
}

PValueResult dip_test_between(const DataMatrix& X, std::size_t g, const Partition& part, int k, int l,
                              DipCalibration& calibration) {
  if (g >= X.cols()) throw UsageError("variable index out of range");
  const auto x = X.column(g);
  const BetweenSet bs = between_set(x, part, k, l, g);
  std::vector<char> in(static_cast<std::size_t>(part.cluster_count()) + 1, 0);
  for (int id : bs.ordered_clusters) in[static_cast<std::size_t>(id)] = 1;
  std::vector<double> sample;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (in[static_cast<std::size_t>(part.label(i))]) sample.push_back(x[i]);
  }
  if (sample.size() < 2) throw DataError("too few observations for a dip test");
  std::sort(sample.begin(), sample.end());
  const DipResult d = dip_statistic(sample);
  PValueResult r;
  r.method = Method::dip;
  r.statistic = d.dip;
  r.sample_size = sample.size();
  r.n_samples = calibration.replicates();
  r.p = calibration.p_value(d.dip, sample.size());
  return r;
}

PValueResult dip_test_between(const DataMatrix& X, std::size_t g, const Partition& part, int k, int l,
                              std::size_t B, std::uint64_t seed) {
  DipCalibration cal(B, seed);
  return dip_test_between(X, g, part, k, l, cal);
}

}  // namespace pcinf
