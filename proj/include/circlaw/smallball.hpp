#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "circlaw/distribution.hpp"

namespace circlaw {

/// Coefficients (v_1, ..., v_n) of the walk v_1 a_1 + ... + v_n a_n.
using CoeffTuple = std::vector<Complex>;

enum class ProbMethod { exact_enumeration, monte_carlo, fourier_quadrature };

std::string to_string(ProbMethod m);

struct ProbEstimate {
  double value = 0.0;
  double std_error = 0.0;  // 0 for exact results
  ProbMethod method = ProbMethod::exact_enumeration;
  bool lower_bound_only = false;
};

/// `count` independent draws of the walk.
std::vector<Complex> walk_sample(const AtomDistribution& dist, const CoeffTuple& v, std::uint64_t seed,
                                 std::size_t count);

/// Exact law of the walk when every step law is enumerable and the merged
/// support stays within `cap`; nullopt otherwise.
std::optional<std::vector<Atom>> walk_support(const AtomDistribution& dist, const CoeffTuple& v,
                                              std::size_t cap = 1000000);

struct SmallBallBudget {
  std::size_t support_cap = 1000000;  // exact path limit
  std::size_t samples = 100000;       // Monte Carlo draws
  std::size_t max_centers = 2000000;  // candidate centres examined
  std::uint64_t seed = 0x736d616c6cULL;
};

/// p_r(v) = sup_z P(|W - z| <= r). Exact when enumerable (every closed disk can
/// be moved until an atom sits on its boundary, then swept around it); otherwise
/// half the samples pick a centre and the other half estimate its mass.
ProbEstimate small_ball_prob(const AtomDistribution& dist, const CoeffTuple& v, double r,
                             const SmallBallBudget& budget = {});

/// Mass of the heaviest closed r-ball over a weighted finite point set.
/// `max_centers` bounds the number of swept arc endpoints; *exhausted is set
/// when it ran out, in which case the result is a lower bound.
double max_ball_mass(const std::vector<Atom>& points, double r, std::size_t max_centers = 2000000,
                     bool* exhausted = nullptr);

/// f(z) = |E e(Re(a z))|^2.
double char_fn_f(const AtomDistribution& dist, Complex z);

/// ||w||_a = (E ||Re(w (a_1 - a_2))||^2_{R/Z})^{1/2}.
double alpha_norm(const AtomDistribution& dist, Complex w);

/// Law of a^(mu) = (a_1 - a_2) I_{mu/2} (enumerable laws only).
std::vector<Atom> lazy_difference_law(const AtomDistribution& dist, double mu);

/// P_mu(v) = E exp(-pi |W_{a^(mu)}(v)|^2): exact when enumerable within the
/// support cap and allow_exact is set, Monte Carlo otherwise.
ProbEstimate conc_prob_mc(const AtomDistribution& dist, double mu, const CoeffTuple& v, std::size_t trials,
                          std::uint64_t seed, bool allow_exact = true, std::size_t support_cap = 1000000);

/// Exact P_mu(v) by enumeration; nullopt when the support exceeds the cap.
std::optional<double> conc_prob_exact(const AtomDistribution& dist, double mu, const CoeffTuple& v,
                                      std::size_t support_cap = 1000000);

/// P_mu(v) = integral over C of prod_i (1 - mu/2 + mu/2 f(xi v_i)) exp(-pi |xi|^2).
/// The reported error adds exp(-pi R^2) for the truncated tail and the gap to a
/// half-resolution rule.
ProbEstimate conc_prob_fourier(const AtomDistribution& dist, double mu, const CoeffTuple& v,
                               double radius_cutoff = 6.0);

/// Quadrature nodes conc_prob_fourier would use for this tuple (finest rule).
double fourier_node_count(const AtomDistribution& dist, const CoeffTuple& v, double radius_cutoff = 6.0);

/// v repeated k times (v^k in the concatenation notation).
CoeffTuple repeat_tuple(const CoeffTuple& v, std::size_t k);
/// v followed by w.
CoeffTuple concat(const CoeffTuple& v, const CoeffTuple& w);

}  // namespace circlaw
