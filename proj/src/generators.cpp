#include "pcinf/generators.hpp"

#include <cmath>
#include <random>
#include <string>

#include "pcinf/error.hpp"

namespace pcinf {

namespace {

std::vector<std::string> numbered_names(std::size_t p) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < p; ++j) names.push_back("X" + std::to_string(j + 1));
  return names;
}

}  // namespace

DataMatrix gen_null_gaussian(std::size_t n, std::size_t p, Rng& rng) {
  DataMatrix m(n, numbered_names(p));
  std::normal_distribution<double> normal(0.0, 1.0);
  // row-major draw order so a row does not depend on n
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) m(i, j) = normal(rng);
  }
  return m;
}

LabeledData gen_three_clusters(std::size_t n_per_cluster, Rng& rng) {
  constexpr double centres[3][2] = {{-5.0, 0.0}, {5.0, 0.0}, {0.0, 10.0}};
  LabeledData out{DataMatrix(3 * n_per_cluster, numbered_names(2)), {}};
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int c = 0; c < 3; ++c) {
    for (std::size_t r = 0; r < n_per_cluster; ++r) {
      const std::size_t i = static_cast<std::size_t>(c) * n_per_cluster + r;
      out.data(i, 0) = centres[c][0] + normal(rng);
      out.data(i, 1) = centres[c][1] + normal(rng);
      out.truth.push_back(c + 1);
    }
  }
  return out;
}

DataMatrix gen_contamination(std::size_t n, double delta, Rng& rng) {
  DataMatrix m(n, numbered_names(1));
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double shift = coin(rng) ? delta : 0.0;
    m(i, 0) = shift + normal(rng);
  }
  return m;
}

LabeledData gen_intervening(std::size_t n, double delta, Rng& rng) {
  const double means[3] = {0.0, delta, delta / 2.0};
  LabeledData out{DataMatrix(n, numbered_names(2)), {}};
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const int group = static_cast<int>(i * 3 / n);
    out.data(i, 0) = means[group] + normal(rng);
    out.data(i, 1) = normal(rng);
    out.truth.push_back(group + 1);
  }
  return out;
}

std::string_view distribution_name(Distribution d) {
  switch (d) {
    case Distribution::gaussian: return "gaussian";
    case Distribution::student_t5: return "student_t5";
    case Distribution::uniform: return "uniform";
    case Distribution::exponential: return "exponential";
    case Distribution::laplace: return "laplace";
    case Distribution::logistic: return "logistic";
    case Distribution::beta22: return "beta22";
  }
  return "unknown";
}

const std::vector<Distribution>& all_distributions() {
  static const std::vector<Distribution> all = {Distribution::gaussian, Distribution::student_t5,
                                                Distribution::uniform,  Distribution::exponential,
                                                Distribution::laplace,  Distribution::logistic,
                                                Distribution::beta22};
  return all;
}

Distribution parse_distribution(std::string_view name) {
  for (Distribution d : all_distributions()) {
    if (distribution_name(d) == name) return d;
  }
  throw UsageError("unknown distribution '" + std::string(name) + "'");
}

DataMatrix gen_robustness(std::size_t n, std::size_t p, Distribution d, Rng& rng) {
  DataMatrix m(n, numbered_names(p));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::student_t_distribution<double> t5(5.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  std::gamma_distribution<double> gamma2(2.0, 1.0);
  auto draw = [&]() -> double {
    switch (d) {
      case Distribution::gaussian: return normal(rng);
      case Distribution::student_t5: return t5(rng);
      case Distribution::uniform: return unif(rng);
      case Distribution::exponential: return expo(rng);
      case Distribution::laplace: {
        const double a = expo(rng);
        return unif(rng) < 0.5 ? -a : a;
      }
      case Distribution::logistic: {
        double u = unif(rng);
        while (u == 0.0) u = unif(rng);
        return std::log(u / (1.0 - u));
      }
      case Distribution::beta22: {
        const double a = gamma2(rng);
        const double b = gamma2(rng);
        return a / (a + b);
      }
    }
    return 0.0;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) m(i, j) = draw();
  }
  return m;
}

}  // namespace pcinf
