#pragma once

// Hot loops in two variants: serial:: is the reference, omp:: parallelizes the
// same fixed work partition, so both return bit-identical results.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "circlaw/common.hpp"
#include "circlaw/distribution.hpp"

namespace circlaw {

/// Reductions are split into blocks of this many terms; each block is summed in
/// index order and blocks are combined in index order.
inline constexpr std::size_t kReductionBlock = 4096;

struct SumPair {
  double sum = 0.0;
  double sum_sq = 0.0;
};

namespace serial {

/// Fills out[i*n + j] with entry (i, j); masked by Bernoulli(rho) when rho is set.
void fill_entries(const AtomDistribution& dist, std::size_t n, std::uint64_t seed, std::optional<double> rho,
                  Complex* out);

/// Sum over k in [0, count) of term(k), with the fixed block partition.
double block_sum(std::size_t count, const std::function<double(std::size_t)>& term);

/// Sum and sum of squares of term(k).
SumPair block_moments(std::size_t count, const std::function<double(std::size_t)>& term);

/// max over (s, t) in the grid of |F_emp(s, t) - reference(s, t)|, where F_emp
/// counts points with Re <= s and Im <= t. Grids must be sorted ascending.
double ecdf_sup_distance(const std::vector<Complex>& points, const std::vector<double>& s_grid,
                         const std::vector<double>& t_grid, const std::function<double(double, double)>& reference);

}  // namespace serial

namespace omp {

void fill_entries(const AtomDistribution& dist, std::size_t n, std::uint64_t seed, std::optional<double> rho,
                  Complex* out);
double block_sum(std::size_t count, const std::function<double(std::size_t)>& term);
SumPair block_moments(std::size_t count, const std::function<double(std::size_t)>& term);
double ecdf_sup_distance(const std::vector<Complex>& points, const std::vector<double>& s_grid,
                         const std::vector<double>& t_grid, const std::function<double(double, double)>& reference);

}  // namespace omp

}  // namespace circlaw
