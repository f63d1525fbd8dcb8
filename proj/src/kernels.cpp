#include "circlaw/kernels.hpp"

#include <algorithm>
#include <cmath>

#include <omp.h>

#include "circlaw/rng.hpp"

namespace circlaw {

namespace {

inline Complex draw_entry(const AtomDistribution& dist, std::uint64_t seed, std::size_t i, std::size_t j,
                          std::optional<double> rho) {
  CounterRng value_rng(seed, kStreamValue, i, j);
  const Complex a = dist.sample(value_rng);
  if (!rho) return a;
  CounterRng mask_rng(seed, kStreamMask, i, j);
  return mask_rng.uniform() < *rho ? a : Complex(0.0, 0.0);
}

std::size_t block_count(std::size_t count) { return (count + kReductionBlock - 1) / kReductionBlock; }

SumPair block_partial(std::size_t b, std::size_t count, const std::function<double(std::size_t)>& term) {
  SumPair p;
  const std::size_t hi = std::min(count, (b + 1) * kReductionBlock);
  for (std::size_t k = b * kReductionBlock; k < hi; ++k) {
    const double x = term(k);
    p.sum += x;
    p.sum_sq += x * x;
  }
  return p;
}

SumPair combine(const std::vector<SumPair>& parts) {
  SumPair out;
  for (const SumPair& p : parts) {
    out.sum += p.sum;
    out.sum_sq += p.sum_sq;
  }
  return out;
}

// Cumulative count table for the empirical CDF on the index grid.
struct EcdfTable {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint32_t> counts;
};

std::size_t grid_index(const std::vector<double>& grid, double x) {
  // First grid value >= x; the point is counted at that value and beyond.
  return static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), x) - grid.begin());
}

void check_sorted(const std::vector<double>& g) {
  if (g.empty()) throw std::invalid_argument("ecdf_sup_distance: empty grid");
  for (std::size_t k = 1; k < g.size(); ++k) {
    if (!(g[k] > g[k - 1])) throw std::invalid_argument("ecdf_sup_distance: grid must be strictly increasing");
  }
}

EcdfTable histogram(const std::vector<Complex>& points, const std::vector<double>& s_grid,
                    const std::vector<double>& t_grid) {
  check_sorted(s_grid);
  check_sorted(t_grid);
  EcdfTable tab;
  tab.rows = s_grid.size();
  tab.cols = t_grid.size();
  tab.counts.assign(tab.rows * tab.cols, 0);
  for (const Complex& p : points) {
    const std::size_t i = grid_index(s_grid, p.real());
    const std::size_t j = grid_index(t_grid, p.imag());
    if (i < tab.rows && j < tab.cols) ++tab.counts[i * tab.cols + j];
  }
  return tab;
}

double row_max(const EcdfTable& tab, std::size_t i, double inv_n, const std::vector<double>& s_grid,
               const std::vector<double>& t_grid, const std::function<double(double, double)>& reference) {
  double m = 0.0;
  for (std::size_t j = 0; j < tab.cols; ++j) {
    const double emp = tab.counts[i * tab.cols + j] * inv_n;
    m = std::max(m, std::abs(emp - reference(s_grid[i], t_grid[j])));
  }
  return m;
}

}  // namespace

namespace serial {

void fill_entries(const AtomDistribution& dist, std::size_t n, std::uint64_t seed, std::optional<double> rho,
                  Complex* out) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = draw_entry(dist, seed, i, j, rho);
  }
}

SumPair block_moments(std::size_t count, const std::function<double(std::size_t)>& term) {
  std::vector<SumPair> parts(block_count(count));
  for (std::size_t b = 0; b < parts.size(); ++b) parts[b] = block_partial(b, count, term);
  return combine(parts);
}

double block_sum(std::size_t count, const std::function<double(std::size_t)>& term) {
  return block_moments(count, term).sum;
}

double ecdf_sup_distance(const std::vector<Complex>& points, const std::vector<double>& s_grid,
                         const std::vector<double>& t_grid, const std::function<double(double, double)>& reference) {
  EcdfTable tab = histogram(points, s_grid, t_grid);
  for (std::size_t i = 0; i < tab.rows; ++i) {
    for (std::size_t j = 1; j < tab.cols; ++j) tab.counts[i * tab.cols + j] += tab.counts[i * tab.cols + j - 1];
  }
  for (std::size_t i = 1; i < tab.rows; ++i) {
    for (std::size_t j = 0; j < tab.cols; ++j) tab.counts[i * tab.cols + j] += tab.counts[(i - 1) * tab.cols + j];
  }
  const double inv_n = points.empty() ? 0.0 : 1.0 / static_cast<double>(points.size());
  double m = 0.0;
  for (std::size_t i = 0; i < tab.rows; ++i) m = std::max(m, row_max(tab, i, inv_n, s_grid, t_grid, reference));
  return m;
}

}  // namespace serial

namespace omp {

void fill_entries(const AtomDistribution& dist, std::size_t n, std::uint64_t seed, std::optional<double> rho,
                  Complex* out) {
  const std::ptrdiff_t total = static_cast<std::ptrdiff_t>(n * n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < total; ++k) {
    const std::size_t i = static_cast<std::size_t>(k) / n;
    const std::size_t j = static_cast<std::size_t>(k) % n;
    out[k] = draw_entry(dist, seed, i, j, rho);
  }
}

SumPair block_moments(std::size_t count, const std::function<double(std::size_t)>& term) {
  std::vector<SumPair> parts(block_count(count));
  const std::ptrdiff_t nb = static_cast<std::ptrdiff_t>(parts.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t b = 0; b < nb; ++b) parts[b] = block_partial(static_cast<std::size_t>(b), count, term);
  return combine(parts);
}

double block_sum(std::size_t count, const std::function<double(std::size_t)>& term) {
  return block_moments(count, term).sum;
}

double ecdf_sup_distance(const std::vector<Complex>& points, const std::vector<double>& s_grid,
                         const std::vector<double>& t_grid, const std::function<double(double, double)>& reference) {
  EcdfTable tab = histogram(points, s_grid, t_grid);
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(tab.rows);
  const std::ptrdiff_t cols = static_cast<std::ptrdiff_t>(tab.cols);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    for (std::ptrdiff_t j = 1; j < cols; ++j) tab.counts[i * cols + j] += tab.counts[i * cols + j - 1];
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < cols; ++j) {
    for (std::ptrdiff_t i = 1; i < rows; ++i) tab.counts[i * cols + j] += tab.counts[(i - 1) * cols + j];
  }
  const double inv_n = points.empty() ? 0.0 : 1.0 / static_cast<double>(points.size());
  double m = 0.0;
#pragma omp parallel for schedule(static) reduction(max : m)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    m = std::max(m, row_max(tab, static_cast<std::size_t>(i), inv_n, s_grid, t_grid, reference));
  }
  return m;
}

}  // namespace omp

}  // namespace circlaw
