#include <cmath>
#include <cstring>
#include <omp.h>
#include <vector>

#include "circlaw/kernels.hpp"
#include "circlaw/spectral.hpp"
#include "doctest.h"

using namespace circlaw;

namespace {

// Forces a team even on a single core so the parallel path really splits work.
struct Threads {
  int saved = omp_get_max_threads();
  explicit Threads(int n) { omp_set_num_threads(n); }
  ~Threads() { omp_set_num_threads(saved); }
};

}  // namespace

TEST_CASE("parallel kernels match the serial reference bit for bit") {
  Threads guard(3);
  const auto term = [](std::size_t k) { return std::sin(0.001 * static_cast<double>(k)) / (1.0 + k); };
  for (std::size_t count : {0u, 1u, 4095u, 4096u, 4097u, 50000u}) {
    CHECK(serial::block_sum(count, term) == omp::block_sum(count, term));
    const auto a = serial::block_moments(count, term), b = omp::block_moments(count, term);
    CHECK(a.sum == b.sum);
    CHECK(a.sum_sq == b.sum_sq);
  }

  for (const auto& d : {AtomDistribution::bernoulli(), AtomDistribution::complex_gaussian()}) {
    for (std::optional<double> rho : {std::optional<double>{}, std::optional<double>{0.3}}) {
      const std::size_t n = 37;
      std::vector<Complex> x(n * n), y(n * n);
      serial::fill_entries(d, n, 99, rho, x.data());
      omp::fill_entries(d, n, 99, rho, y.data());
      CHECK(std::memcmp(x.data(), y.data(), x.size() * sizeof(Complex)) == 0);
    }
  }

  std::vector<Complex> pts;
  for (int k = 0; k < 300; ++k) pts.emplace_back(std::cos(k * 1.7) * 0.9, std::sin(k * 2.3) * 0.8);
  std::vector<double> grid;
  for (int k = 0; k <= 80; ++k) grid.push_back(-2.0 + 0.05 * k);
  CHECK(serial::ecdf_sup_distance(pts, grid, grid, uniform_disk_cdf) ==
        omp::ecdf_sup_distance(pts, grid, grid, uniform_disk_cdf));
}
