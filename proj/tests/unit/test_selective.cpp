#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <mutex>
#include <random>

#include "../common/penguins.hpp"
#include "pcinf/clusterer.hpp"
#include "pcinf/error.hpp"
#include "pcinf/random.hpp"
#include "pcinf/selective.hpp"

using namespace pcinf;

namespace {

DataMatrix column(std::vector<double> x) {
  const std::size_t n = x.size();
  return DataMatrix(n, {"x"}, std::move(x));
}

// Pi_perp x = x - eta (eta^T x) / |eta|^2, written out independently.
std::vector<double> orth(std::span<const double> x, const std::vector<double>& eta) {
  double dot = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += eta[i] * x[i];
    nn += eta[i] * eta[i];
  }
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] -= eta[i] * dot / nn;
  return out;
}

// Fixed partition; checks every perturbed dataset it is shown.
class CheckingClusterer final : public Clusterer {
 public:
  CheckingClusterer(Partition p, DataMatrix original, std::size_t g, std::vector<double> eta)
      : p_(std::move(p)), x0_(std::move(original)), g_(g), eta_(std::move(eta)), base_(orth(x0_.column(g_), eta_)) {}
  Partition cluster(const DataMatrix&) const override { return p_; }
  bool preserves(const DataMatrix& m, const Partition&, int, int) const override {
    ++calls;
    const std::vector<double> o = orth(m.column(g_), eta_);
    double dev = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i) dev = std::max(dev, std::abs(o[i] - base_[i]));
    bool other_cols_same = true;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j == g_) continue;
      for (std::size_t i = 0; i < m.rows(); ++i) other_cols_same = other_cols_same && m(i, j) == x0_(i, j);
    }
    std::lock_guard lock(mu_);
    max_dev = std::max(max_dev, dev);
    all_other_same = all_other_same && other_cols_same;
    return true;
  }
  mutable std::atomic<std::size_t> calls{0};
  mutable double max_dev = 0.0;
  mutable bool all_other_same = true;

 private:
  Partition p_;
  DataMatrix x0_;
  std::size_t g_;
  std::vector<double> eta_;
  std::vector<double> base_;
  mutable std::mutex mu_;
};

class NeverPreserved final : public Clusterer {
 public:
  Partition cluster(const DataMatrix& m) const override { return Partition::from_labels(std::vector<int>(m.rows(), 1)); }
};

DataMatrix random_two_column(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> z;
  DataMatrix m(n, {"a", "b"});
  for (std::size_t i = 0; i < n; ++i) {
    m(i, 0) = z(rng);
    m(i, 1) = z(rng);
  }
  return m;
}

Partition thirds(std::size_t n) {
  std::vector<int> lab(n);
  for (std::size_t i = 0; i < n; ++i) lab[i] = static_cast<int>(i * 3 / n) + 1;
  return Partition::from_labels(lab);
}

}  // namespace

TEST(Contrast, Examples) {
  const Partition p = Partition::from_labels({1, 1, 2, 2});
  const ContrastVector cv = contrast_vector(p, 1, 2);
  EXPECT_EQ(cv.eta, (std::vector<double>{0.5, 0.5, -0.5, -0.5}));
  EXPECT_DOUBLE_EQ(cv.norm_sq, 1.0);
  const std::vector<double> x = {1, 3, 2, 4};
  EXPECT_DOUBLE_EQ(test_statistic(x, cv), -1.0);
  const std::vector<double> y = {0, 0, 5, 5};
  EXPECT_DOUBLE_EQ(test_statistic(y, cv), -5.0);
  const std::vector<double> flat = {2, 4, 4, 2};
  EXPECT_DOUBLE_EQ(test_statistic(flat, cv), 0.0);

  const ContrastVector uneven = contrast_vector(Partition::from_labels({1, 2, 2, 2}), 1, 2);
  EXPECT_DOUBLE_EQ(uneven.norm_sq, 1.0 + 1.0 / 3.0);
}

TEST(Contrast, StructureOnRandomPartitions) {
  Rng rng(4);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<int> lab(30);
    for (std::size_t i = 0; i < lab.size(); ++i) lab[i] = static_cast<int>(i % 4) + 1;
    std::shuffle(lab.begin(), lab.end(), rng);
    const Partition p = Partition::from_labels(lab);
    const ContrastVector cv = contrast_vector(p, 2, 4);
    double sum = 0.0, nn = 0.0;
    for (std::size_t i = 0; i < lab.size(); ++i) {
      sum += cv.eta[i];
      nn += cv.eta[i] * cv.eta[i];
      if (lab[i] == 1 || lab[i] == 3) EXPECT_EQ(cv.eta[i], 0.0);
      if (lab[i] == 2) EXPECT_GT(cv.eta[i], 0.0);
      if (lab[i] == 4) EXPECT_LT(cv.eta[i], 0.0);
    }
    EXPECT_NEAR(sum, 0.0, 1e-12);
    EXPECT_NEAR(nn, cv.norm_sq, 1e-12);
  }
  EXPECT_THROW(contrast_vector(thirds(9), 1, 1), UsageError);
  EXPECT_THROW(contrast_vector(thirds(9), 1, 4), UsageError);
}

TEST(Perturb, IdentityAtObservedStatistic) {
  const DataMatrix X = random_two_column(25, 8);
  const Partition p = thirds(25);
  const ContrastVector cv = contrast_vector(p, 1, 3);
  const double m = test_statistic(X.column(1), cv);
  EXPECT_EQ(perturb_column(X, 1, cv, m), X);
}

TEST(Perturb, ReachesTargetAndKeepsComplement) {
  const DataMatrix X = random_two_column(31, 9);
  const Partition p = thirds(31);
  const ContrastVector cv = contrast_vector(p, 2, 3);
  for (double phi : {0.0, -2.5, 7.0}) {
    const DataMatrix Y = perturb_column(X, 0, cv, phi);
    EXPECT_NEAR(test_statistic(Y.column(0), cv), phi, 1e-12);
    const auto a = orth(X.column(0), cv.eta);
    const auto b = orth(Y.column(0), cv.eta);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
    for (std::size_t i = 0; i < X.rows(); ++i) {
      EXPECT_EQ(Y(i, 1), X(i, 1));
      if (p.label(i) == 1) EXPECT_EQ(Y(i, 0), X(i, 0));
    }
  }
}

TEST(Variance, Examples) {
  const std::vector<double> a = {0, 2};
  EXPECT_DOUBLE_EQ(variance_pair(a, Partition::from_labels({1, 2}), 1, 2), 2.0);
  const std::vector<double> b = {0, 0, 4, 4};
  EXPECT_DOUBLE_EQ(variance_pair(b, Partition::from_labels({1, 1, 2, 2}), 1, 2), 16.0 / 3.0);
  const std::vector<double> c = {3, 3, 3};
  EXPECT_EQ(variance_pair(c, Partition::from_labels({1, 2, 2}), 1, 2), 0.0);
  const std::vector<double> d = {1, 2, 3, 4, 100};
  EXPECT_DOUBLE_EQ(variance_pair(d, Partition::from_labels({1, 1, 2, 2, 3}), 1, 2), 5.0 / 3.0);
  // mean 22, squared deviations 441 + 400 + 361 + 324 + 6084
  EXPECT_DOUBLE_EQ(variance_all(d), 7610.0 / 4.0);
}

TEST(Selective, ZeroStatisticGivesOne) {
  const DataMatrix X = column({1, 2, 3, 2, 1, 3});
  const Partition p = Partition::from_labels({1, 1, 1, 2, 2, 2});
  SelectiveOptions opt;
  opt.n_samples = 500;
  const PValueResult r = selective_p_value(X, 0, p, 1, 2, FixedClusterer(p), opt);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_DOUBLE_EQ(r.p, 1.0);
  EXPECT_EQ(r.n_preserved, 500u);
}

TEST(Selective, FloorAtOneOverNPlusOne) {
  std::vector<double> x;
  std::vector<int> lab;
  for (int i = 0; i < 10; ++i) {
    x.push_back(i * 0.01);
    lab.push_back(1);
  }
  for (int i = 0; i < 10; ++i) {
    x.push_back(100 + i * 0.01);
    lab.push_back(2);
  }
  const DataMatrix X = column(x);
  const Partition p = Partition::from_labels(lab);
  for (std::size_t N : {10u, 2000u}) {
    SelectiveOptions opt;
    opt.n_samples = N;
    // the pair variance would absorb the separation itself
    opt.sigma_sq = 1e-3;
    const PValueResult r = selective_p_value(X, 0, p, 1, 2, FixedClusterer(p), opt);
    EXPECT_NEAR(r.p, 1.0 / static_cast<double>(N + 1), 1e-12 / static_cast<double>(N + 1));
  }
}

TEST(Selective, SamplesFollowTheStatedScheme) {
  const DataMatrix X = random_two_column(30, 11);
  const Partition p = WardClusterer(3).cluster(X);
  SelectiveOptions opt;
  opt.n_samples = 300;
  opt.seed = 77;
  std::vector<PerturbationSample> samples;
  const PValueResult r = selective_p_value(X, 1, p, 1, 3, WardClusterer(3), opt, &samples);
  ASSERT_EQ(samples.size(), 300u);

  const ContrastVector cv = contrast_vector(p, 1, 3);
  const double m = test_statistic(X.column(1), cv);
  const double s2 = variance_pair(X.column(1), p, 1, 3) * cv.norm_sq;
  long double num = 0, den = 0;
  std::size_t kept = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    Rng rng(derive_seed(77, i));
    std::normal_distribution<double> z(0.0, 1.0);
    const double omega = m + std::sqrt(s2) * z(rng);
    EXPECT_NEAR(samples[i].omega, omega, 1e-12);
    const double lw = (m * m - 2.0 * m * omega) / (2.0 * s2);
    EXPECT_NEAR(samples[i].log_weight, lw, 1e-12 * (1.0 + std::abs(lw)));
    EXPECT_EQ(samples[i].exceeds, std::abs(omega) >= std::abs(m));
    EXPECT_EQ(samples[i].preserved,
              clusters_preserved(p, 1, 3, WardClusterer(3).cluster(perturb_column(X, 1, cv, omega))));
    if (samples[i].preserved) {
      ++kept;
      den += std::exp(static_cast<long double>(lw));
      if (samples[i].exceeds) num += std::exp(static_cast<long double>(lw));
    }
  }
  ASSERT_GT(kept, 0u);
  EXPECT_EQ(r.n_preserved, kept);
  const long double pibar = den / 300.0L;
  EXPECT_NEAR(r.p, static_cast<double>((num + pibar) / (den + pibar)), 1e-12);
  EXPECT_DOUBLE_EQ(selective_estimate(samples), r.p);
}

TEST(Selective, PValueRangeAndSwapInvariance) {
  for (std::uint64_t s = 0; s < 8; ++s) {
    const DataMatrix X = random_two_column(40, 100 + s);
    const WardClusterer ward(3);
    const Partition p = ward.cluster(X);
    SelectiveOptions opt;
    opt.n_samples = 200;
    opt.seed = s;
    for (std::size_t g = 0; g < 2; ++g) {
      const PValueResult a = selective_p_value(X, g, p, 1, 3, ward, opt);
      const PValueResult b = selective_p_value(X, g, p, 3, 1, ward, opt);
      EXPECT_GE(a.p, 1.0 / 201.0 - 1e-15);
      EXPECT_LE(a.p, 1.0);
      EXPECT_EQ(a.p, b.p);
      EXPECT_EQ(a.statistic, -b.statistic);
    }
  }
}

TEST(Selective, SeedDeterminismAndThreadIndependence) {
  const DataMatrix X = random_two_column(50, 5);
  const WardClusterer ward(3);
  const Partition p = ward.cluster(X);
  SelectiveOptions opt;
  opt.n_samples = 400;
  opt.seed = 123;
  std::vector<PerturbationSample> s1, s4, again;
  const PValueResult a = selective_p_value(X, 0, p, 1, 2, ward, opt, &s1);
  const PValueResult b = selective_p_value(X, 0, p, 1, 2, ward, opt, &again);
  opt.threads = 4;
  const PValueResult c = selective_p_value(X, 0, p, 1, 2, ward, opt, &s4);
  EXPECT_EQ(a.p, b.p);
  EXPECT_EQ(a.p, c.p);
  EXPECT_EQ(a.n_preserved, c.n_preserved);
  for (std::size_t i = 0; i < s1.size(); ++i) {
    EXPECT_EQ(s1[i].omega, s4[i].omega);
    EXPECT_EQ(s1[i].preserved, s4[i].preserved);
  }
  opt.threads = 1;
  opt.seed = 124;
  EXPECT_NE(selective_p_value(X, 0, p, 1, 2, ward, opt).p, a.p);
}

TEST(Selective, ComplementInvariantPerSample) {
  const DataMatrix X = random_two_column(24, 21);
  const Partition p = thirds(24);
  const ContrastVector cv = contrast_vector(p, 1, 2);
  CheckingClusterer checker(p, X, 1, cv.eta);
  SelectiveOptions opt;
  opt.n_samples = 250;
  opt.threads = 3;
  selective_p_value(X, 1, p, 1, 2, checker, opt);
  EXPECT_EQ(checker.calls.load(), 250u);
  EXPECT_LT(checker.max_dev, 1e-12);
  EXPECT_TRUE(checker.all_other_same);
}

TEST(Selective, GaussianTailWhenEverythingIsPreserved) {
  const DataMatrix X = column({0.3, -0.2, 0.9, 1.4, 1.1, 2.0});
  const Partition p = Partition::from_labels({1, 1, 1, 2, 2, 2});
  SelectiveOptions opt;
  opt.n_samples = 40000;
  opt.sigma_sq = 0.5;
  const PValueResult r = selective_p_value(X, 0, p, 1, 2, FixedClusterer(p), opt);
  const double m = (0.3 - 0.2 + 0.9 - 1.4 - 1.1 - 2.0) / 3.0;
  const double z = std::abs(m) / std::sqrt(0.5 * (2.0 / 3.0));
  EXPECT_NEAR(r.p, std::erfc(z / std::sqrt(2.0)), 0.01);
}

TEST(Selective, NoPreservedSamplesFallsBackToOne) {
  const DataMatrix X = random_two_column(12, 2);
  const Partition p = thirds(12);
  SelectiveOptions opt;
  opt.n_samples = 50;
  const PValueResult r = selective_p_value(X, 0, p, 1, 2, NeverPreserved(), opt);
  EXPECT_EQ(r.p, 1.0);
  EXPECT_EQ(r.n_preserved, 0u);
  EXPECT_TRUE(r.warning);
  EXPECT_EQ(r.warning_text, "no preserved samples");
}

TEST(Selective, DegenerateVarianceIsAnError) {
  const DataMatrix X = DataMatrix(6, {"x", "const"}, {1, 2, 3, 4, 5, 6, 7, 7, 7, 7, 7, 7});
  const Partition p = Partition::from_labels({1, 1, 1, 2, 2, 2});
  try {
    selective_p_value(X, 1, p, 1, 2, FixedClusterer(p), {});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate variance"), std::string::npos);
  }
}

TEST(Selective, AllObservationsVarianceIsNotSmaller) {
  const DataMatrix X = random_two_column(30, 3);
  const Partition p = thirds(30);
  SelectiveOptions opt;
  opt.variance = VarianceMode::all_observations;
  opt.n_samples = 10;
  const PValueResult r = selective_p_value(X, 0, p, 1, 2, FixedClusterer(p), opt);
  EXPECT_DOUBLE_EQ(*r.sigma_sq, variance_all(X.column(0)));
}

TEST(TTest, WelchAndPooledReference) {
  const std::vector<double> x = {1.0, 2.5, 3.1, 4.7, 2.2, 3.9, 5.1, 6.4, 4.4, 7.3, 5.8};
  const Partition p = Partition::from_labels({1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2});
  EXPECT_NEAR(t_test_p_value(x, p, 1, 2).p, 0.007592809640465875, 1e-10);
  EXPECT_NEAR(t_test_p_value(x, p, 1, 2, TTestKind::pooled).p, 0.006587927129824174, 1e-10);
  EXPECT_EQ(t_test_p_value(x, p, 2, 1).p, t_test_p_value(x, p, 1, 2).p);
}

TEST(TTest, EqualMeansAndDegenerateInput) {
  const std::vector<double> x = {1, 2, 3, 3, 2, 1};
  EXPECT_NEAR(t_test_p_value(x, Partition::from_labels({1, 1, 1, 2, 2, 2}), 1, 2).p, 1.0, 1e-12);
  const std::vector<double> y = {0, 0, 1, 1};
  EXPECT_THROW(t_test_p_value(y, Partition::from_labels({1, 1, 2, 2}), 1, 2), DataError);
  EXPECT_THROW(t_test_p_value(y, Partition::from_labels({1, 2, 2, 2}), 1, 2), DataError);
}

TEST(TTest, NegativeControlBodyMassIsSpurious) {
  const DataMatrix x = zscale(filter_rows(testdata::penguins_complete(), {{"species", "Gentoo"}, {"sex", "female"}}));
  const Partition p = WardClusterer(3).cluster(x);
  EXPECT_LT(t_test_p_value(x.column(x.column_index("body_mass_g")), p, 1, 2).p, 0.001);
}

TEST(Statistic, PenguinsMeanDifferences) {
  const DataMatrix x = zscale(testdata::penguins_complete());
  const Partition p = WardClusterer(3).cluster(x);
  const ContrastVector cv = contrast_vector(p, 1, 2);
  EXPECT_NEAR(std::abs(test_statistic(x.column(x.column_index("bill_depth_mm")), cv)), 1.67, 0.01);
}

TEST(Methods, NamesRoundTrip) {
  for (Method m : {Method::direct, Method::merged, Method::dip, Method::ttest}) EXPECT_EQ(parse_method(method_name(m)), m);
  EXPECT_THROW(parse_method("bogus"), UsageError);
}
