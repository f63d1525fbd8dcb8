#include <cmath>
#include <functional>
#include <numbers>

#include "circlaw/linalg.hpp"
#include "circlaw/spectral.hpp"
#include "doctest.h"

using namespace circlaw;

namespace {

constexpr double kPi = std::numbers::pi;

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 50) {
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, int d) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        const double flm = f(lm), frm = f(rm);
        const double left = (mid - lo) / 6 * (flo + 4 * flm + fmid);
        const double right = (hi - mid) / 6 * (fmid + 4 * frm + fhi);
        if (d <= 0 || std::abs(left + right - whole) <= 15 * tol) return left + right + (left + right - whole) / 15;
        return rec(lo, mid, flo, flm, fmid, left, d - 1) + rec(mid, hi, fmid, frm, fhi, right, d - 1);
      };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return rec(a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), depth);
}

// Area of the disk below (s, t) by integrating the vertical chord length in
// the angle variable x = -cos(theta), which removes the edge singularity.
double disk_cdf_oracle(double s, double t) {
  if (s <= -1 || t <= -1) return 0.0;
  const double theta_max = std::acos(-std::min(s, 1.0));
  auto len = [t](double theta) {
    const double c = std::sin(theta);
    return std::max(0.0, std::min(t, c) + c) * std::sin(theta);
  };
  return adaptive_simpson(len, 0.0, theta_max, 1e-14) / kPi;
}

Esd sunflower(std::size_t count) {
  Esd e;
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (std::size_t k = 0; k < count; ++k) e.points.push_back(std::polar(std::sqrt((k + 0.5) / count), golden * k));
  return e;
}

MatrixSample wrap(const CMatrix& m) {
  MatrixSample s;
  s.n = m.rows();
  s.entries = m;
  return s;
}

}  // namespace

TEST_CASE("uniform disk cdf") {
  CHECK(uniform_disk_cdf(1, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(uniform_disk_cdf(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(uniform_disk_cdf(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(uniform_disk_cdf(-1, 0.3) == 0.0);
  CHECK(uniform_disk_cdf(5, 5) == 1.0);
  for (double s : {-0.9, -0.5, -0.1, 0.0, 0.3, 0.5, 0.8, 0.99, 1.5}) {
    for (double t : {-0.95, -0.6, -0.2, 0.0, 0.25, 0.5, 0.9, 1.2}) {
      CAPTURE(s);
      CAPTURE(t);
      CHECK(std::abs(uniform_disk_cdf(s, t) - disk_cdf_oracle(s, t)) < 1e-10);
    }
  }
  // Inclusion-exclusion on rectangles.
  for (double s1 = -1.1; s1 < 1.1; s1 += 0.23) {
    for (double t1 = -1.1; t1 < 1.1; t1 += 0.19) {
      const double s2 = s1 + 0.31, t2 = t1 + 0.17;
      CHECK(uniform_disk_cdf(s2, t2) - uniform_disk_cdf(s1, t2) - uniform_disk_cdf(s2, t1) +
                uniform_disk_cdf(s1, t1) >=
            -1e-15);
    }
  }
}

TEST_CASE("empirical cdf") {
  const Esd zero{{0.0}};
  CHECK(cdf(zero, 0, 0) == 1.0);
  const Esd pm{{1.0, -1.0}};
  CHECK(cdf(pm, 0, INFINITY) == 0.5);
  CHECK(cdf(pm, INFINITY, INFINITY) == 1.0);
  CHECK(cdf(pm, -2, 5) == 0.0);
  const Esd cloud = sunflower(300);
  for (double s = -1.2; s < 1.2; s += 0.1) {
    for (double t = -1.2; t < 1.2; t += 0.1) {
      CHECK(cdf(cloud, s, t) <= cdf(cloud, s + 0.1, t));
      CHECK(cdf(cloud, s, t) <= cdf(cloud, s, t + 0.1));
    }
  }
}

TEST_CASE("esd of matrices") {
  const double sigma = 1.0;
  const auto scaled_identity = wrap(std::sqrt(9.0) * CMatrix::identity(9));
  for (const auto& p : esd_of_matrix(scaled_identity, sigma).points) CHECK(std::abs(p - 1.0) < 1e-14);
  const auto zero = esd_of_matrix(wrap(CMatrix(5, 5)), sigma);
  CHECK(cdf(zero, 0, 0) == 1.0);
  CHECK_THROWS(esd_of_matrix(scaled_identity, 0.0));

  const auto g = esd_of_matrix(sample_matrix(AtomDistribution::complex_gaussian(), 512, 2024), 1.0);
  std::size_t inside = 0;
  for (const auto& p : g.points) inside += std::abs(p) <= 1.1;
  CHECK(inside >= 507);
}

TEST_CASE("sup distance") {
  const auto grid = GridSpec::standard();
  CHECK(grid.s_values.size() == 201);
  CHECK(grid.s_values.back() == doctest::Approx(2.0));
  CHECK(sup_distance(sunflower(100000), grid) <= 0.01);
  CHECK(sup_distance(Esd{{0.0}}, grid) >= 0.75 - 1e-12);
  CHECK_THROWS(sup_distance(Esd{{0.0}}, GridSpec{}));

  const auto esd = esd_of_matrix(sample_matrix(AtomDistribution::bernoulli(), 64, 9), 1.0);
  const double base = sup_distance(esd, grid);
  Esd shuffled = esd;
  std::reverse(shuffled.points.begin(), shuffled.points.end());
  std::rotate(shuffled.points.begin(), shuffled.points.begin() + 17, shuffled.points.end());
  CHECK(sup_distance(shuffled, grid) == base);
  const auto coarse = GridSpec::uniform(-2, 2, 0.1);
  CHECK(sup_distance(esd, coarse) <= base);
  CHECK(sup_distance(esd, GridSpec::uniform(-2, 2, 0.01)) >= base);
}

TEST_CASE("characteristic functions") {
  const Esd zero{{0.0}};
  CHECK(std::abs(char_fn_empirical(zero, 3.0, -2.0) - 1.0) < 1e-15);
  const Esd pm{{1.0, -1.0}};
  CHECK(std::abs(char_fn_empirical(pm, kPi, 0) + 1.0) < 1e-15);
  const Esd cloud = sunflower(200);
  CHECK(std::abs(char_fn_empirical(cloud, 0, 0) - 1.0) < 1e-15);
  for (double u = -5; u <= 5; u += 1.3) CHECK(std::abs(char_fn_empirical(cloud, u, 0.7 * u)) <= 1.0 + 1e-15);

  CHECK(std::abs(char_fn_disk(0, 0) - 1.0) < 1e-12);
  CHECK(std::abs(char_fn_disk(1.2, 3.3) - char_fn_disk(3.3, 1.2)) < 1e-12);
  for (auto [u, v] : std::vector<std::pair<double, double>>{{3, 4}, {0.5, 0}, {10, -7}, {0, 25}}) {
    const double rho = std::hypot(u, v);
    const double bessel = 2 * std::cyl_bessel_j(1.0, rho) / rho;
    const double radial =
        adaptive_simpson([rho](double r) { return 2 * r * std::cyl_bessel_j(0.0, rho * r); }, 0, 1, 1e-13);
    const Complex c = char_fn_disk(u, v);
    CHECK(std::abs(c.real() - bessel) < 1e-8);
    CHECK(std::abs(c.real() - radial) < 1e-6);
    CHECK(std::abs(c.imag()) < 1e-8);
  }
}

TEST_CASE("nu_esd and log integrals") {
  const auto zero = wrap(CMatrix(6, 6));
  const auto nu = nu_esd(zero, 2.0, 1.0);
  for (double x : nu.xs) CHECK(x == doctest::Approx(4.0));
  const auto split = log_integral_split(nu, 1e-6);
  CHECK(split.upper == doctest::Approx(std::log(4.0)));
  CHECK(split.lower == 0.0);

  const auto tiny = log_integral_split(NuEsd{{1e-20}, 0.0}, 1e-12);
  CHECK(tiny.lower == doctest::Approx(std::log(1e-20)));
  CHECK(tiny.upper == 0.0);
  const auto with_zero = log_integral_split(NuEsd{{0.0, 1.0}, 0.0}, 1e-12);
  CHECK(with_zero.lower_is_neg_inf);
  CHECK(std::isinf(with_zero.lower));
  CHECK_THROWS(log_integral_split(nu, 0.0));

  // Scaled unitary (a permutation) at z = 0.
  CMatrix perm(5, 5);
  for (int i = 0; i < 5; ++i) perm(i, (i + 2) % 5) = std::sqrt(5.0);
  for (double x : nu_esd(wrap(perm), 0.0, 1.0).xs) CHECK(x == doctest::Approx(1.0));

  const auto r = sample_matrix(AtomDistribution::complex_gaussian(), 8, 12);
  const Complex z(0.3, -0.4);
  double sum = 0;
  for (double x : nu_esd(r, z, 1.0).xs) sum += x;
  CMatrix shifted = (1.0 / std::sqrt(8.0)) * r.entries;
  for (int i = 0; i < 8; ++i) shifted(i, i) -= z;
  CHECK(std::abs(sum - std::pow(shifted.frobenius_norm(), 2)) < 1e-9);

  int clean = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = sample_matrix(AtomDistribution::complex_gaussian(), 16, 5000 + trial);
    clean += log_integral_split(nu_esd(m, Complex(0.5, 0.5), 1.0), split_threshold(16, 3)).lower == 0.0;
  }
  CHECK(clean >= 195);
}

TEST_CASE("finite-difference derivative of the log integral") {
  const auto zero = wrap(CMatrix(4, 4));
  for (auto [s, t] : std::vector<std::pair<double, double>>{{0.7, 0.2}, {-1.1, 0.5}, {0.3, -0.9}}) {
    const double h = 1e-3;
    CHECK(std::abs(g_n_fd(zero, s, t, h, 1.0) - 2 * s / (s * s + t * t)) < 10 * h * h);
  }
  CHECK_THROWS(g_n_fd(zero, 0.5, 0.5, 0.0, 1.0));

  // Sign-symmetric atoms: the law of g_n(s, t) is that of -g_n(-s, t).
  double plus = 0, minus = 0, s2 = 0;
  const int trials = 200;
  for (int k = 0; k < trials; ++k) {
    const auto m = sample_matrix(AtomDistribution::bernoulli(), 12, 700 + k);
    const double a = g_n_fd(m, 0.4, 0.3, 1e-4, 1.0);
    const double b = g_n_fd(m, -0.4, 0.3, 1e-4, 1.0);
    plus += a;
    minus += b;
    s2 += (a + b) * (a + b);
  }
  const double diff = (plus + minus) / trials;
  const double se = std::sqrt(s2 / trials / trials);
  CHECK(std::abs(diff) < 3 * se + 1e-12);
}

TEST_CASE("second moment inequality") {
  const auto diag = wrap(CMatrix::diagonal({1.0, Complex(0, 2), -3.0}));
  const auto e = esd_of_matrix(diag, 1.0);
  const auto rep = second_moment_report(diag, e, 1.0);
  CHECK(std::abs(rep.eigen_side - rep.entry_side) < 1e-12);
  CHECK(rep.holds);
  const auto b = sample_matrix(AtomDistribution::bernoulli(), 64, 31);
  CHECK(second_moment_check(b, esd_of_matrix(b, 1.0), 1.0));
  const auto nil = wrap(CMatrix{{0, 1}, {0, 0}});
  const auto nrep = second_moment_report(nil, esd_of_matrix(nil, 1.0), 1.0);
  CHECK(nrep.eigen_side == 0.0);
  CHECK(nrep.entry_side == doctest::Approx(0.25));
}

TEST_CASE("trace moments") {
  const auto b = AtomDistribution::bernoulli();
  const auto k1 = trace_moment_estimate(AtomDistribution::complex_gaussian(), 24, 1, 0.2, 40, 1);
  CHECK(std::abs(k1.mean - 24.0 * 24.0) < 5 * k1.std_error);
  // n = 1 needs an atom strictly inside the unit cutoff.
  const auto half = AtomDistribution::discrete({0.5, -0.5}, {0.5, 0.5});
  const auto one = trace_moment_estimate(half, 1, 2, 0.2, 10, 3);
  CHECK(one.mean == doctest::Approx(1.0));
  CHECK(one.std_error == doctest::Approx(0.0));
  CHECK_THROWS_AS(trace_moment_estimate(b, 1, 2, 0.2, 10, 3), DegenerateDistribution);

  std::vector<double> ratios;
  for (std::size_t n : {16u, 32u, 64u}) {
    const auto est = trace_moment_estimate(b, n, 3, 0.2, 8, 11);
    ratios.push_back(est.mean / std::pow(double(n), 4));
  }
  // Bounded: the normalized moment approaches the Catalan-type constant 5.
  for (double r : ratios) CHECK(r < 6.0);
  CHECK(ratios.back() <= ratios.front() * 1.5);
}
