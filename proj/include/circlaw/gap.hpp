#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "circlaw/common.hpp"
#include "circlaw/distribution.hpp"
#include "circlaw/smallball.hpp"

namespace circlaw {

/// Symmetric GAP {n_1 v_1 + ... + n_r v_r : |n_j| <= L_j}.
struct Gap {
  std::vector<Complex> generators;
  std::vector<double> dims;

  Gap() = default;
  Gap(std::vector<Complex> generators, std::vector<double> dims);
  std::size_t rank() const noexcept { return generators.size(); }
};

constexpr std::uint64_t kDefaultGapCap = 10000000;

/// Product of (2 floor(L_j) + 1); throws CapExceeded above `cap`.
std::uint64_t multiplicity(const Gap& gap, std::uint64_t cap = kDefaultGapCap);

struct GapPoints {
  std::vector<Complex> points;  // distinct, sorted by (re, im)
  std::uint64_t multiplicity_total = 0;
  bool exact_arithmetic = false;

  // Exact mode: points[k] = (keys[k].first + i keys[k].second) / denominator.
  std::int64_t denominator = 1;
  std::vector<std::pair<std::int64_t, std::int64_t>> keys;

  std::size_t size() const noexcept { return points.size(); }
  /// #(Q ∩ B(centre, radius)) for the closed ball.
  std::size_t count_within(double radius, Complex centre = 0.0) const;
};

/// All distinct points. Uses exact Gaussian-integer arithmetic when every
/// generator is a Gaussian rational with denominator <= 10^6, otherwise
/// deduplicates on a 1e-9 lattice.
GapPoints enumerate(const Gap& gap, std::uint64_t cap = kDefaultGapCap);

bool is_proper(const Gap& gap, std::uint64_t cap = kDefaultGapCap);

Gap dilate(const Gap& gap, double t);

/// D(Q) = #Q / #(Q ∩ B(0, 1)).
double dispersion(const Gap& gap, std::uint64_t cap = kDefaultGapCap);
double dispersion(const GapPoints& q);

/// Greedy maximal eps-separated subset, scanning `points` in order: a point
/// joins when it is farther than eps from every chosen point.
std::vector<Complex> epsilon_net(const std::vector<Complex>& points, double eps);

/// Distinct values up to a 1e-9 lattice, sorted by lattice key.
std::vector<Complex> merge_points(const std::vector<Complex>& points);

struct Ball {
  Complex centre;
  double radius;
};

struct PigeonholeCount {
  std::size_t differences_in_ball = 0;  // #((Q - Q) ∩ B(0, r))
  std::size_t q_in_omega = 0;           // #(Q ∩ Ω)
  std::size_t cover_size = 0;           // M
  bool holds = true;
};

/// Direct count for #((Q-Q) ∩ B(0,r)) >= #(Q ∩ Ω)/M where Ω is the union of
/// `omega_cover` (each ball of radius at most r/2).
PigeonholeCount pigeonhole_count(const std::vector<Complex>& q, const std::vector<Ball>& omega_cover, double r);
bool pigeonhole_check(const std::vector<Complex>& q, const std::vector<Ball>& omega_cover, double r);

struct LacunaryBasis {
  std::vector<Complex> primary;
  std::vector<Complex> secondary;
  std::vector<double> ratios;  // K_i = 1 + K |Im(w'_i / w_i)|
  std::size_t d = 0;
  double K = 0.0;
  double R = 0.0;
  double d0 = 0.0;
  std::size_t q_size = 0;
  std::size_t q_in_ball = 0;
  /// #Q / (prod(K K_i) #(Q ∩ B(0,R))); the per-factor constant is implicit.
  double many_vectors_ratio = 0.0;
  /// d / (1 + log(#Q / #(Q ∩ B(0,R))) / log K).
  double crude_bound_constant = 0.0;
};

/// Greedy lacunary basis. Stage i searches t_i Q ∩ B(0, |w_{i-1}|/K) with
/// t_i = min(1, 2^{-d0+i}) and d0 = c_r (1 + log(#Q/#(Q∩B(0,R))) / log K).
LacunaryBasis lacunary_basis(const Gap& gap, double K, double R, std::uint64_t cap = kDefaultGapCap,
                             double c_r = 8.0);

struct LevelSetMeasure {
  double measure = 0.0;
  double std_error = 0.0;
  double dispersion = 0.0;
  double threshold_scale = 0.0;  // D^eps
};

/// Area of {xi in B(xi0, 1) : ||xi v_i||_a <= D(Q)^eps / L_i for all i} by
/// Monte Carlo with uniform draws in the disk.
LevelSetMeasure level_set_measure(const Gap& gap, const AtomDistribution& dist, Complex xi0, double eps,
                                  std::size_t samples, std::uint64_t seed, std::uint64_t cap = kDefaultGapCap);

/// Membership test used by level_set_measure.
bool in_level_set(const Gap& gap, const AtomDistribution& dist, Complex xi, double scale);

struct ForwardLoResult {
  ProbEstimate p;
  double dispersion_scaled = 0.0;  // D(GAP(v, sqrt(mu) L))
  std::size_t tuple_length = 0;
};

constexpr std::size_t kForwardTupleCap = 10000;

/// P_mu of the tuple holding round(L_i^2) copies of v_i, next to the dispersion
/// of the sqrt(mu)-scaled GAP. Without an explicit method the exact path is
/// tried first, then Fourier quadrature, then Monte Carlo.
ForwardLoResult forward_lo_experiment(const AtomDistribution& dist, double mu, const Gap& gap,
                                      std::optional<ProbMethod> method = std::nullopt, std::size_t mc_trials = 100000,
                                      std::uint64_t seed = 1, std::uint64_t cap = kDefaultGapCap);

struct WeakSurvey {
  std::vector<Complex> weak_points;
  std::size_t net24_size = 0;
  double base_dispersion = 0.0;
};

/// z is weak when D(Q + GAP(z, k)) < l D(Q).
WeakSurvey weak_element_survey(const Gap& gap, int k, double l, const std::vector<Complex>& grid,
                               std::uint64_t cap = kDefaultGapCap);

}  // namespace circlaw
