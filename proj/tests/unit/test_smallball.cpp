#include <cmath>
#include <numbers>
#include <random>

#include "circlaw/smallball.hpp"
#include "doctest.h"

using namespace circlaw;

namespace {

constexpr double kPi = std::numbers::pi;

double binom_mode(int n) {
  double p = 1.0;
  for (int k = 1; k <= n / 2; ++k) p *= static_cast<double>(n / 2 + k) / k;
  return p / std::pow(2.0, n);
}

double frac_norm(double x) { return std::abs(x - std::nearbyint(x)); }

CoeffTuple random_tuple(std::mt19937_64& gen, int len, bool complex_coeffs) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CoeffTuple v(len);
  for (auto& z : v) z = complex_coeffs ? Complex(u(gen), u(gen)) : Complex(u(gen), 0.0);
  return v;
}

AtomDistribution random_discrete(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int atoms = 2 + static_cast<int>(gen() % 3);
  std::vector<Complex> values(atoms);
  std::vector<double> probs(atoms);
  double total = 0;
  for (int k = 0; k < atoms; ++k) {
    values[k] = Complex(u(gen), u(gen));
    probs[k] = 0.2 + std::abs(u(gen));
    total += probs[k];
  }
  for (auto& p : probs) p /= total;
  return AtomDistribution::discrete(values, probs);
}

double p_exact(const AtomDistribution& d, double mu, const CoeffTuple& v) {
  const auto p = conc_prob_exact(d, mu, v);
  REQUIRE(p.has_value());
  return *p;
}

}  // namespace

TEST_CASE("walk samples") {
  const auto b = AtomDistribution::bernoulli();
  for (const auto& w : walk_sample(b, {0.0, 0.0, 0.0}, 1, 100)) CHECK(w == Complex(0, 0));
  const auto one = AtomDistribution::point_mass(1.0);
  for (const auto& w : walk_sample(one, {1.0, Complex(0, 2), -0.5}, 2, 50)) {
    CHECK(std::abs(w - Complex(0.5, 2)) < 1e-15);
  }
  const auto draws = walk_sample(b, {1.0, 1.0}, 3, 100000);
  double counts[3] = {0, 0, 0};
  for (const auto& w : draws) counts[static_cast<int>(std::lround(w.real() / 2.0)) + 1] += 1;
  const double expect[3] = {0.25, 0.5, 0.25};
  for (int k = 0; k < 3; ++k) {
    const double sd = std::sqrt(1e5 * expect[k] * (1 - expect[k]));
    CHECK(std::abs(counts[k] - 1e5 * expect[k]) < 5 * sd);
  }
  CHECK_THROWS(walk_sample(b, {1.0}, 1, 0));
}

TEST_CASE("small ball probability of bernoulli walks") {
  const auto b = AtomDistribution::bernoulli();
  const auto p4 = small_ball_prob(b, {1, 1, 1, 1}, 0.5);
  CHECK(p4.value == 0.375);
  CHECK(p4.method == ProbMethod::exact_enumeration);
  CHECK(p4.std_error == 0.0);
  for (int n = 2; n <= 20; n += 2) {
    const auto p = small_ball_prob(b, CoeffTuple(n, 1.0), 0.5);
    CHECK(std::abs(p.value - binom_mode(n)) < 1e-14);
  }
  // Radius 1 reaches two neighbouring atoms of the lattice 2Z.
  CHECK(std::abs(small_ball_prob(b, {1, 1}, 1.0).value - 0.75) < 1e-15);
  CHECK_THROWS(small_ball_prob(b, {1}, -1.0));
}

TEST_CASE("max ball mass needs off-midpoint centres") {
  // Three points on a circle of radius 1: no point or pair midpoint covers all three.
  std::vector<Atom> pts;
  for (int k = 0; k < 3; ++k) pts.push_back({std::polar(1.0, 2 * kPi * k / 3), 1.0 / 3});
  CHECK(max_ball_mass(pts, 1.0) == doctest::Approx(1.0));
  CHECK(max_ball_mass(pts, 0.0) == doctest::Approx(1.0 / 3));
  CHECK(max_ball_mass(pts, 0.5) == doctest::Approx(1.0 / 3));
  CHECK(max_ball_mass(pts, std::sqrt(3.0) / 2) == doctest::Approx(2.0 / 3));
  bool exhausted = false;
  max_ball_mass(pts, 1.0, 2, &exhausted);
  CHECK(exhausted);
}

TEST_CASE("monte carlo small ball") {
  const auto g = AtomDistribution::complex_gaussian();
  SmallBallBudget budget;
  budget.samples = 20000;
  const auto p0 = small_ball_prob(g, {1, 1, 1}, 0.0, budget);
  CHECK(p0.method == ProbMethod::monte_carlo);
  CHECK(p0.value <= 3 * p0.std_error);
  // W ~ CN(0, 3): P(|W| <= r) = 1 - exp(-r^2 / 3), maximised at the origin.
  const double r = 0.8;
  const auto p = small_ball_prob(g, {1, 1, 1}, r, budget);
  const double truth = 1 - std::exp(-r * r / 3);
  CHECK(p.value <= truth + 3 * p.std_error);
  CHECK(p.value >= truth - 0.02);

  // Exact and Monte Carlo paths on the same discrete walk.
  const auto b = AtomDistribution::bernoulli();
  SmallBallBudget mc;
  mc.support_cap = 1;
  mc.samples = 40000;
  const auto est = small_ball_prob(b, {1, 1, 1, 1}, 0.5, mc);
  CHECK(est.method == ProbMethod::monte_carlo);
  CHECK(est.value <= 0.375 + 3 * est.std_error);
  CHECK(est.value >= 0.375 - 3 * est.std_error);
}

TEST_CASE("characteristic function f") {
  const auto b = AtomDistribution::bernoulli();
  CHECK(char_fn_f(b, 0.0) == doctest::Approx(1.0));
  for (double x : {0.01, 0.13, 0.4, 1.7}) {
    const Complex z(x, 0.3);
    CHECK(char_fn_f(b, z) == doctest::Approx(std::pow(std::cos(2 * kPi * x), 2)).epsilon(1e-12));
    CHECK(char_fn_f(b, -z) == doctest::Approx(char_fn_f(b, z)));
  }
  const auto g = AtomDistribution::complex_gaussian();
  CHECK(char_fn_f(g, Complex(0.2, 0.1)) >= 0.0);
  CHECK(char_fn_f(g, Complex(0.2, 0.1)) <= 1.0);
}

TEST_CASE("alpha norm") {
  const auto b = AtomDistribution::bernoulli();
  CHECK(alpha_norm(b, 0.0) == 0.0);
  for (Complex w : {Complex(0.1, 0.4), Complex(0.3, -1), Complex(1.26, 0), Complex(-0.2, 0.2)}) {
    CHECK(alpha_norm(b, w) == doctest::Approx(frac_norm(2 * w.real()) / std::sqrt(2.0)).epsilon(1e-12));
  }
  // Gaussian closed forms against Monte Carlo on a rotated copy (which forces sampling).
  const auto g = AtomDistribution::complex_gaussian();
  const auto rg = AtomDistribution::real_gaussian();
  const auto trunc = AtomDistribution::truncated(g, 50.0);
  const auto trunc_r = AtomDistribution::truncated(rg, 50.0);
  for (Complex w : {Complex(0.05, 0.02), Complex(0.2, 0.1), Complex(0.7, -0.4), Complex(2.0, 1.0)}) {
    CHECK(alpha_norm(g, w) == doctest::Approx(alpha_norm(trunc, w)).epsilon(0.02));
    CHECK(alpha_norm(rg, w) == doctest::Approx(alpha_norm(trunc_r, w)).epsilon(0.02));
  }
  // Small-variance branch and series branch agree where they meet.
  CHECK(alpha_norm(g, 0.2499999) == doctest::Approx(alpha_norm(g, 0.2500001)).epsilon(1e-6));
  // Large spread: uniform fractional part, E||U||^2 = 1/12.
  CHECK(alpha_norm(g, 10.0) == doctest::Approx(std::sqrt(1.0 / 12)).epsilon(1e-9));
}

TEST_CASE("lazy difference law") {
  for (double mu : {0.25, 0.5, 1.0}) {
    const auto law = lazy_difference_law(AtomDistribution::bernoulli(), mu);
    REQUIRE(law.size() == 3);
    for (const auto& a : law) {
      const double expect = a.value == Complex(0, 0) ? 1 - mu / 4 : mu / 8;
      CHECK(a.prob == doctest::Approx(expect).epsilon(1e-15));
    }
  }
  CHECK_THROWS(lazy_difference_law(AtomDistribution::bernoulli(), 1.5));
}

TEST_CASE("concentration probability examples") {
  const auto b = AtomDistribution::bernoulli();
  const double truth = 0.75 + 0.25 * std::exp(-4 * kPi);
  const auto exact = conc_prob_mc(b, 1.0, {1.0}, 10, 1);
  CHECK(exact.method == ProbMethod::exact_enumeration);
  CHECK(exact.value == doctest::Approx(truth).epsilon(1e-15));
  CHECK(conc_prob_mc(b, 1.0, {0.0, 0.0}, 10, 1).value == 1.0);

  const auto four = conc_prob_fourier(b, 1.0, {1.0});
  CHECK(std::abs(four.value - truth) < 1e-6);
  CHECK(four.method == ProbMethod::fourier_quadrature);
  CHECK(std::abs(conc_prob_fourier(b, 1.0, {}).value - 1.0) < 1e-12);
  CHECK(conc_prob_fourier(b, 1e-9, {1.0, 0.3}).value == doctest::Approx(1.0).epsilon(1e-8));
  CHECK_THROWS(conc_prob_fourier(b, 1.0, {1.0}, 0.0));

  const auto mc = conc_prob_mc(b, 1.0, {1.0}, 200000, 5, false);
  CHECK(mc.method == ProbMethod::monte_carlo);
  CHECK(std::abs(mc.value - truth) < 4 * mc.std_error);
}

TEST_CASE("fourier matches enumeration") {
  std::mt19937_64 gen(17);
  const auto b = AtomDistribution::bernoulli();
  for (int len : {2, 5, 8}) {
    for (double mu : {0.25, 1.0}) {
      const auto v = random_tuple(gen, len, true);
      const double e = p_exact(b, mu, v);
      const auto f = conc_prob_fourier(b, mu, v);
      CHECK(std::abs(f.value - e) < 1e-8);
      CHECK(f.std_error < 1e-6);
    }
  }
  const auto d = AtomDistribution::discrete({Complex(1, 0), Complex(0, 1), Complex(-0.5, -0.5)}, {0.5, 0.3, 0.2});
  const CoeffTuple v{0.7, Complex(0.2, 0.5), -0.4};
  CHECK(std::abs(conc_prob_fourier(d, 0.5, v).value - p_exact(d, 0.5, v)) < 1e-8);
}

TEST_CASE("fourier matches monte carlo for gaussian atoms") {
  const auto g = AtomDistribution::complex_gaussian();
  const CoeffTuple v{0.3, Complex(0.1, 0.2), -0.25};
  const auto f = conc_prob_fourier(g, 0.5, v);
  const auto mc = conc_prob_mc(g, 0.5, v, 100000, 9);
  CHECK(std::abs(f.value - mc.value) < 3 * std::hypot(f.std_error, mc.std_error));
  // Given the set S of active steps, W ~ CN(0, 2 sum_S |v_i|^2) and E exp(-pi|W|^2) = 1 / (1 + 2 pi sum_S |v_i|^2).
  double expect = 0.0;
  for (unsigned mask = 0; mask < 8; ++mask) {
    double var = 0.0, prob = 1.0;
    for (int i = 0; i < 3; ++i) {
      const bool on = mask >> i & 1;
      prob *= on ? 0.25 : 0.75;
      if (on) var += std::norm(v[i]);
    }
    expect += prob / (1 + 2 * kPi * var);
  }
  CHECK(f.value == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("concentration probability properties") {
  std::mt19937_64 gen(2024);
  const double mus[] = {0.25, 0.5, 1.0};
  for (int inst = 0; inst < 40; ++inst) {
    const auto d = inst % 2 ? AtomDistribution::bernoulli() : random_discrete(gen);
    const auto v = random_tuple(gen, 1 + inst % 3, inst % 4 < 2);
    const auto w = random_tuple(gen, 1 + inst % 2, true);
    const auto w2 = random_tuple(gen, 1, true);
    const double mu = mus[inst % 3];

    // (i) monotone in mu and permutation-invariant.
    CHECK(p_exact(d, mu, v) <= p_exact(d, mu / 2, v) + 1e-14);
    CoeffTuple vw = concat(v, w);
    CoeffTuple rev(vw.rbegin(), vw.rend());
    CHECK(p_exact(d, mu, vw) == doctest::Approx(p_exact(d, mu, rev)).epsilon(1e-12));
    // (ii)
    CHECK(p_exact(d, mu, vw) <= p_exact(d, mu, v) + 1e-14);
    // (iii)
    CHECK(p_exact(d, mu, v) * p_exact(d, mu, w) <= 2 * p_exact(d, mu, vw) + 1e-14);
    // (iv) with k = 2.
    CHECK(p_exact(d, mu, v) <= p_exact(d, mu / 2, repeat_tuple(v, 2)) + 1e-14);
    // (v) with m = 2.
    const double lhs = p_exact(d, mu, concat(concat(v, w), w2));
    const double rhs = std::sqrt(p_exact(d, mu, concat(v, repeat_tuple(w, 2))) *
                                 p_exact(d, mu, concat(v, repeat_tuple(w2, 2))));
    CHECK(lhs <= rhs + 1e-14);
  }
}

TEST_CASE("small ball is bounded by concentration probability") {
  std::mt19937_64 gen(99);
  for (int inst = 0; inst < 30; ++inst) {
    const auto d = inst % 2 ? AtomDistribution::bernoulli() : random_discrete(gen);
    const auto v = random_tuple(gen, 2 + inst % 3, inst % 3 == 0);
    for (double r : {0.1, 0.5, 1.0}) {
      const double p = small_ball_prob(d, v, r).value;
      CHECK(p <= std::exp(kPi * r * r) * p_exact(d, 1.0, v) + 1e-12);
    }
    const double mu = 0.3 + 0.2 * (inst % 4);
    const auto sparse = AtomDistribution::masked(d, mu);
    for (double r : {0.1, 0.5, 1.0}) {
      const double p = small_ball_prob(sparse, v, r).value;
      CHECK(p <= std::exp(kPi * r * r) * p_exact(d, mu, v) + 1e-12);
    }
  }
}

TEST_CASE("alpha norm properties") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const AtomDistribution laws[] = {AtomDistribution::bernoulli(), AtomDistribution::real_gaussian(),
                                   AtomDistribution::complex_gaussian(), random_discrete(gen)};
  for (const auto& d : laws) {
    for (int k = 0; k < 50; ++k) {
      const Complex z(u(gen), u(gen)), w(u(gen), u(gen));
      const double nz = alpha_norm(d, z);
      CHECK(nz >= 0.0);
      CHECK(nz <= 1.0);
      CHECK(alpha_norm(d, -z) == doctest::Approx(nz).epsilon(1e-12));
      CHECK(alpha_norm(d, z + w) <= nz + alpha_norm(d, w) + 1e-12);
    }
  }
  // Lower bound near the origin for a scanned scale c.
  for (const auto& d : {AtomDistribution::bernoulli(), AtomDistribution::complex_gaussian()}) {
    bool any = false;
    for (int e = 1; e <= 10 && !any; ++e) {
      const double c = std::ldexp(1.0, -e);
      bool ok = true;
      for (int k = 0; k < 200 && ok; ++k) {
        const Complex z = std::polar(c * (k + 1) / 200.0, 2 * kPi * k / 37.0);
        ok = alpha_norm(d, z) >= c * std::abs(z.real()) - 1e-15;
      }
      any = ok;
    }
    CHECK(any);
  }
}

TEST_CASE("f is bounded by the alpha norm") {
  for (int k = 0; k <= 1000; ++k) {
    const double t = 0.5 * k / 1000.0;
    CHECK(std::cos(2 * kPi * t) <= 1 - 8 * t * t + 1e-15);
  }
  std::mt19937_64 gen(8);
  const AtomDistribution laws[] = {AtomDistribution::bernoulli(), random_discrete(gen), random_discrete(gen)};
  for (const auto& d : laws) {
    for (int i = -20; i <= 20; ++i) {
      for (int j = -20; j <= 20; ++j) {
        const Complex w(0.05 * i, 0.05 * j);
        const double a = alpha_norm(d, w);
        CHECK(char_fn_f(d, w) <= 1 - 8 * a * a + 1e-12);
      }
    }
  }
}
