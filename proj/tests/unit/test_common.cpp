#include <cmath>
#include <numbers>
#include <set>

#include "circlaw/common.hpp"
#include "circlaw/quadrature.hpp"
#include "circlaw/rng.hpp"
#include "doctest.h"

using namespace circlaw;

TEST_CASE("splitmix64 reference values") {
  // First outputs of the reference SplitMix64 stream seeded with 0.
  std::uint64_t state = 0;
  auto next = [&] {
    const std::uint64_t out = splitmix64(state);
    state += 0x9E3779B97F4A7C15ULL;
    return out;
  };
  CHECK(next() == 0xE220A8397B1DCDAFULL);
  CHECK(next() == 0x6E789E6AA1B965F4ULL);
  CHECK(next() == 0x06C45D188009454FULL);
}

TEST_CASE("fnv1a64 of known strings") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("counter rng is keyed and reproducible") {
  CounterRng a(7, kStreamValue, 3, 4);
  CounterRng b(7, kStreamValue, 3, 4);
  CounterRng c(7, kStreamValue, 4, 3);
  for (int k = 0; k < 10; ++k) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
  CounterRng u(11);
  double lo = 1.0, hi = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double x = u.uniform();
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
}

TEST_CASE("normal draws have unit variance") {
  CounterRng r(3);
  const int m = 200000;
  double s = 0, s2 = 0;
  for (int k = 0; k < m; ++k) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
  }
  CHECK(std::abs(s / m) < 5.0 / std::sqrt(m));
  CHECK(std::abs(s2 / m - 1.0) < 5.0 * std::sqrt(2.0 / m));
}

TEST_CASE("complex formatting round-trips") {
  for (Complex z : {Complex(1.5, -2.25), Complex(0.1, 0.2), Complex(-3, 0), Complex(0, -1e-300)}) {
    CHECK(parse_complex(format_complex(z)) == z);
  }
  CHECK(format_complex(Complex(1, 2)) == "1+2i");
  CHECK(format_complex(Complex(1, -2)) == "1-2i");
  CHECK(parse_complex("i") == Complex(0, 1));
  CHECK(parse_complex("-i") == Complex(0, -1));
  CHECK(parse_complex(" 2.5e-3 - 4i ") == Complex(2.5e-3, -4));
  CHECK(parse_complex("1e+2+1e-2i") == Complex(100, 0.01));
  CHECK_THROWS_AS(parse_complex("abc"), std::invalid_argument);
  CHECK_THROWS_AS(parse_complex(""), std::invalid_argument);
  const auto list = parse_complex_list("1, i; -1-i");
  REQUIRE(list.size() == 3);
  CHECK(list[2] == Complex(-1, -1));
}

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  for (std::size_t n : {1u, 2u, 5u, 16u, 64u}) {
    const auto rule = gauss_legendre(n, 0.0, 2.0);
    double wsum = 0.0;
    for (double w : rule.weights) wsum += w;
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
    // Degree 2n-1 is exact.
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += rule.weights[k] * std::pow(rule.nodes[k], 2 * n - 1);
    CHECK(s == doctest::Approx(std::pow(2.0, 2 * n) / (2 * n)).epsilon(1e-12));
    for (std::size_t k = 1; k < n; ++k) CHECK(rule.nodes[k] > rule.nodes[k - 1]);
  }
  CHECK(integrate([](double x) { return std::cos(x); }, 0, std::numbers::pi / 2) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS(gauss_legendre(0));
}
