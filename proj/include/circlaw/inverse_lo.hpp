#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "circlaw/distribution.hpp"
#include "circlaw/gap.hpp"
#include "circlaw/smallball.hpp"

namespace circlaw {

enum class Verdict { rich, poor };

std::string to_string(Verdict v);

struct RichPoorVerdict {
  Verdict verdict = Verdict::rich;
  ProbEstimate p_est;
  double threshold = 0.0;  // n^{-A-1}
  double beta = 0.0;       // n^{-B+1/2}
  double A = 0.0;
  double B = 0.0;
};

/// Poor when p_beta(v) + 3 stderr <= n^{-A-1}. v must be a unit vector; an
/// estimate that only bounds p from below counts as rich.
RichPoorVerdict classify_rich_poor(const AtomDistribution& dist, const CoeffTuple& v, std::size_t n, double A,
                                   double B, const SmallBallBudget& budget = {});

/// beta^{-1} v / 2 rounded to the Gaussian-integer multiples of `spacing`,
/// ties to even. Coordinates whose quotient by the spacing is at least 2^52
/// are already lattice points in double precision and pass through.
CoeffTuple round_to_lattice_spacing(const CoeffTuple& v, double beta, double spacing);

/// round_to_lattice_spacing with spacing n^{-A-20}.
CoeffTuple round_to_lattice(const CoeffTuple& v, double beta, std::size_t n, double A);

struct SearchBudget {
  std::size_t support_cap = 200000;       // exact P scoring
  double fourier_node_limit = 4.0e6;      // Fourier P scoring
  std::size_t mc_trials = 20000;          // fallback P scoring
  std::uint64_t gap_cap = 2000000;        // GAP enumeration
};

struct SearchStep {
  std::size_t growing_count = 0;     // coordinates passing the dispersion test
  std::size_t chosen_index = 0;      // index into the original V
  Complex generator;
  double dispersion_before = 0.0;
  double dispersion_after = 0.0;
  double score_before = 0.0;         // P_mu(V^[r] w_1^{k^2} ... w_r^{k^2})
  double score_after = 0.0;          // P_mu(V^[r+1] w_1^{k^2} ... w_{r+1}^{k^2})
  ProbMethod score_method = ProbMethod::exact_enumeration;
};

struct GapReport {
  std::size_t r = 0;
  std::vector<Complex> generators;
  std::size_t k = 0;
  double mu = 1.0;
  double dispersion_final = 1.0;    // D(GAP((w_1..w_r), k))
  std::size_t exceptional_count = 0;  // r k^2 deleted coordinates
  std::size_t final_growing_count = 0;  // growing coordinates at exit (< k^2 on normal exit)
  bool terminated_normally = false;
  std::string stop_reason;
  std::vector<SearchStep> trace;
};

/// Iterative GAP growth with mu = 1 and k = floor(n^{1/2 - eps}).
GapReport structure_search(const AtomDistribution& dist, const CoeffTuple& V, std::size_t n, double eps,
                           std::size_t d_max = 10, const SearchBudget& budget = {}, std::uint64_t seed = 1);

/// Sparse variant: mu = rho, m = n^eps and k = floor(sqrt(m / mu)).
GapReport structure_search_sparse(const AtomDistribution& dist, const CoeffTuple& V, std::size_t n, double eps,
                                  double rho, std::size_t d_max = 10, const SearchBudget& budget = {},
                                  std::uint64_t seed = 1);

/// P_mu by the cheapest adequate method: exact, then Fourier, then Monte Carlo.
ProbEstimate score_concentration(const AtomDistribution& dist, double mu, const CoeffTuple& v,
                                 const SearchBudget& budget, std::uint64_t seed);

/// log of n^{(-1/2+eps) n} p^{-n} + exp(c n / log n). The second term models
/// the unquantified exp(o(n)) factor.
double log_net_size_bound(std::size_t n, double eps, double p, double o_n_constant);
double net_size_bound(std::size_t n, double eps, double p, double o_n_constant);

/// Generators as "a+bi" joined by ';'.
std::string format_generators(const std::vector<Complex>& gens);

}  // namespace circlaw
