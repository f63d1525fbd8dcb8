#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "circlaw/cmatrix.hpp"
#include "circlaw/distribution.hpp"
#include "circlaw/smallball.hpp"

namespace circlaw {

/// The deterministic part M in M + N.
class ShiftSpec {
 public:
  enum class Kind { zero, scalar, custom };

  static ShiftSpec zero() { return ShiftSpec(Kind::zero, 0.0, {}); }
  /// M = z I.
  static ShiftSpec scalar(Complex z) { return ShiftSpec(Kind::scalar, z, {}); }
  static ShiftSpec custom(CMatrix m);

  Kind kind() const noexcept { return kind_; }
  Complex z() const noexcept { return z_; }
  /// The n x n matrix; throws if a custom matrix has the wrong shape.
  CMatrix build(std::size_t n) const;
  /// "zero", "scalar(a+bi)" or "custom(n)".
  std::string describe() const;

 private:
  ShiftSpec(Kind kind, Complex z, CMatrix m) : kind_(kind), z_(z), m_(std::move(m)) {}
  Kind kind_;
  Complex z_;
  CMatrix m_;
};

/// Singular values of one sampled M + N.
struct LsvSample {
  std::uint64_t seed = 0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  bool singular = false;  // an exactly zero LU pivot
  bool failed = false;    // linear algebra threw; see error
  std::string error;
  /// sigma_max / sigma_min, +inf when singular.
  double condition() const;
};

/// Per-trial seed: mix(seed, n, trial).
std::vector<LsvSample> lsv_samples(const AtomDistribution& dist, std::size_t n, const ShiftSpec& shift,
                                   std::size_t trials, std::uint64_t seed,
                                   const std::optional<SparseSpec>& sparse = std::nullopt);

enum class TailStatistic { sigma_min, condition };

struct LsvTailResult {
  std::size_t n = 0;
  std::string ensemble;
  std::string shift;
  TailStatistic statistic = TailStatistic::sigma_min;
  double B = 0.0;
  std::size_t trials = 0;    // successful trials
  std::size_t hits = 0;      // sigma_min <= n^{-B}, or condition >= n^B
  std::size_t failures = 0;  // trials whose linear algebra failed
  double rate = 0.0;
  double std_error = 0.0;
};

/// Tail count over already-sampled matrices. Singular samples always hit.
LsvTailResult tail_from_samples(const std::vector<LsvSample>& samples, std::size_t n, double B,
                                TailStatistic statistic);

LsvTailResult lsv_tail(const AtomDistribution& dist, std::size_t n, const ShiftSpec& shift, double B,
                       std::size_t trials, std::uint64_t seed,
                       const std::optional<SparseSpec>& sparse = std::nullopt);

/// One result per B, all on the same sampled matrices.
std::vector<LsvTailResult> lsv_tail_sweep(const AtomDistribution& dist, std::size_t n, const ShiftSpec& shift,
                                          const std::vector<double>& Bs, std::size_t trials, std::uint64_t seed,
                                          const std::optional<SparseSpec>& sparse = std::nullopt);

LsvTailResult condition_number_experiment(const AtomDistribution& dist, std::size_t n, const ShiftSpec& shift,
                                          double B, std::size_t trials, std::uint64_t seed,
                                          const std::optional<SparseSpec>& sparse = std::nullopt);

/// Largest number of assignments the exact singularity path enumerates.
inline constexpr double kSingularityEnumerationCap = 1e8;

/// Exact when the law is enumerable and |support|^{n^2} <= 1e8: Gaussian-integer
/// supports use fraction-free elimination, others the LU singularity test.
/// Otherwise Monte Carlo with `trials` matrices.
ProbEstimate singularity_prob(const AtomDistribution& dist, std::size_t n, std::size_t trials, std::uint64_t seed);
std::optional<double> singularity_prob_exact(const AtomDistribution& dist, std::size_t n);
ProbEstimate singularity_prob_mc(const AtomDistribution& dist, std::size_t n, std::size_t trials,
                                 std::uint64_t seed);

/// True when det(m) == 0 for a matrix of Gaussian integers (fraction-free
/// Bareiss elimination in 128-bit arithmetic). Throws std::overflow_error when
/// intermediate values leave the safe range.
bool gaussian_integer_singular(const std::vector<std::int64_t>& re, const std::vector<std::int64_t>& im,
                               std::size_t n);

enum class RowSetup {
  random,  // all rows fresh per trial
  fixed,   // first n-1 rows drawn once from `seed`, last row fresh per trial
};

/// Distance from the last row to the span of the other n-1 rows, one value per trial.
std::vector<double> row_distance_experiment(const AtomDistribution& dist, std::size_t n, std::size_t trials,
                                            std::uint64_t seed, RowSetup setup = RowSetup::random);

/// |<X, u>| for a unit normal u: distance from a random row X to the hyperplane u^perp.
std::vector<double> hyperplane_distance_samples(const AtomDistribution& dist, const std::vector<Complex>& normal,
                                                std::size_t trials, std::uint64_t seed);

/// Distance of a vector to the span of the given rows (any rank).
double distance_to_span(const std::vector<std::vector<Complex>>& rows, const std::vector<Complex>& x);

/// Reference law of the row distance for real Gaussian entries: P(|g| <= t).
double half_normal_cdf(double t);
/// Same for complex Gaussian entries with E|a|^2 = 1: 1 - exp(-t^2).
double complex_gaussian_distance_cdf(double t);

std::string to_string(TailStatistic s);

}  // namespace circlaw
