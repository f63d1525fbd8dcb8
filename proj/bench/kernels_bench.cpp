// Serial reference vs OpenMP for the hot kernels. Arg is the problem size.

#include <benchmark/benchmark.h>

#include <cmath>
#include <functional>
#include <vector>

#include "circlaw/kernels.hpp"
#include "circlaw/spectral.hpp"

using namespace circlaw;

namespace {

double term(std::size_t k) { return std::sin(1e-3 * static_cast<double>(k)) / (1.0 + k); }

using Term = std::function<double(std::size_t)>;
using Reference = std::function<double(double, double)>;

void BM_block_sum(benchmark::State& state, double (*sum)(std::size_t, const Term&)) {
  const Term f = term;
  const auto count = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sum(count, f));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_block_moments(benchmark::State& state, SumPair (*moments)(std::size_t, const Term&)) {
  const Term f = term;
  const auto count = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(moments(count, f));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_fill_entries(benchmark::State& state,
                     void (*fill)(const AtomDistribution&, std::size_t, std::uint64_t, std::optional<double>, Complex*)) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = AtomDistribution::complex_gaussian();
  std::vector<Complex> out(n * n);
  for (auto _ : state) {
    fill(d, n, 7, std::nullopt, out.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_ecdf_sup(benchmark::State& state,
                 double (*sup)(const std::vector<Complex>&, const std::vector<double>&, const std::vector<double>&,
                               const Reference&)) {
  const Reference cdf = uniform_disk_cdf;
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<Complex> pts(n);
  for (std::size_t k = 0; k < n; ++k) pts[k] = Complex(std::cos(1.7 * k) * 0.9, std::sin(2.3 * k) * 0.8);
  std::vector<double> grid;
  for (int k = 0; k <= 200; ++k) grid.push_back(-2.0 + 0.02 * k);
  for (auto _ : state) benchmark::DoNotOptimize(sup(pts, grid, grid, cdf));
}

}  // namespace

BENCHMARK_CAPTURE(BM_block_sum, serial, &serial::block_sum)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK_CAPTURE(BM_block_sum, omp, &omp::block_sum)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK_CAPTURE(BM_block_moments, serial, &serial::block_moments)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK_CAPTURE(BM_block_moments, omp, &omp::block_moments)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK_CAPTURE(BM_fill_entries, serial, &serial::fill_entries)->Arg(128)->Arg(512);
BENCHMARK_CAPTURE(BM_fill_entries, omp, &omp::fill_entries)->Arg(128)->Arg(512);
BENCHMARK_CAPTURE(BM_ecdf_sup, serial, &serial::ecdf_sup_distance)->Arg(512)->Arg(2048);
BENCHMARK_CAPTURE(BM_ecdf_sup, omp, &omp::ecdf_sup_distance)->Arg(512)->Arg(2048);

BENCHMARK_MAIN();
