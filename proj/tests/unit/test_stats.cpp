#include <cmath>
#include <random>

#include "circlaw/stats.hpp"
#include "doctest.h"

using namespace circlaw;

TEST_CASE("mean and standard error") {
  const auto m = mean_stderr({1.0, 2.0, 3.0, 4.0});
  CHECK(m.mean == doctest::Approx(2.5));
  // sample variance 5/3, stderr sqrt(5/12)
  CHECK(m.std_error == doctest::Approx(std::sqrt(5.0 / 12.0)));
  CHECK(mean_stderr({7.0}).std_error == 0.0);
  CHECK(mean_stderr({}).mean == 0.0);
}

TEST_CASE("linear fit") {
  std::vector<double> x, y;
  for (double n : {64.0, 128.0, 256.0, 512.0}) {
    x.push_back(std::log(n));
    y.push_back(-0.5 * std::log(n) + 0.3);
  }
  auto f = linear_fit(x, y);
  CHECK(f.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0));
  f = linear_fit(x, std::vector<double>(4, std::log(0.2)));
  CHECK(f.slope == doctest::Approx(0.0));
  CHECK(f.r_squared == 1.0);
  f = linear_fit({0, 1, 2, 3}, {0, 1, 0, 1});
  // sxy = 1, sxx = 5, syy = 1: slope 0.2 and r^2 = sxy^2 / (sxx syy) = 0.2
  CHECK(f.slope == doctest::Approx(0.2));
  CHECK(f.r_squared == doctest::Approx(0.2));
  CHECK_THROWS(linear_fit({1, 1}, {0, 1}));
  CHECK_THROWS(linear_fit({1}, {0}));
}

TEST_CASE("Kolmogorov-Smirnov") {
  // Samples at the quartiles of U(0,1): just below 0.25, F_n = 0 while F = 1/4.
  const double d = ks_statistic({0.25, 0.5, 0.75, 1.0}, [](double t) { return std::clamp(t, 0.0, 1.0); });
  CHECK(d == doctest::Approx(0.25));
  CHECK(kolmogorov_survival(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(kolmogorov_survival(0.0) == 1.0);
  CHECK(kolmogorov_survival(3.0) < 1e-7);

  const auto same = ks_two_sample({1, 2, 3}, {1, 2, 3});
  CHECK(same.statistic == 0.0);
  CHECK(same.p_value == 1.0);
  const auto apart = ks_two_sample({1, 2, 3, 4, 5}, {10, 11, 12, 13, 14});
  CHECK(apart.statistic == 1.0);
  CHECK(apart.p_value < 0.01);

  std::mt19937_64 gen(3);
  std::normal_distribution<double> g;
  std::vector<double> a(4000), b(4000), c(4000);
  for (auto& v : a) v = g(gen);
  for (auto& v : b) v = g(gen);
  for (auto& v : c) v = g(gen) + 0.2;
  CHECK(ks_two_sample(a, b).p_value > 0.01);
  CHECK(ks_two_sample(a, c).p_value < 1e-6);
  CHECK(ks_statistic(a, [](double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); }) < 0.03);
}
