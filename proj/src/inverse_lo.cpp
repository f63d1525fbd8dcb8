#include "circlaw/inverse_lo.hpp"

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <exception>
#include <stdexcept>

#include "circlaw/rng.hpp"

namespace circlaw {

namespace {

constexpr double kTwoPow52 = 4503599627370496.0;

double round_coordinate(double x, double spacing) {
  const double q = x / spacing;
  if (!(std::abs(q) < kTwoPow52)) return x;
  // nearbyint follows the current rounding mode; pin it to nearest-even.
  const int saved = std::fegetround();
  std::fesetround(FE_TONEAREST);
  const double k = std::nearbyint(q);
  std::fesetround(saved);
  return k * spacing;
}

double gap_dispersion(const std::vector<Complex>& gens, std::size_t k, std::uint64_t cap) {
  if (gens.empty()) return 1.0;
  return dispersion(Gap(gens, std::vector<double>(gens.size(), static_cast<double>(k))), cap);
}

struct Coordinate {
  std::size_t index;
  Complex value;
};

CoeffTuple assemble(const std::vector<Coordinate>& rest, const std::vector<Complex>& gens, std::size_t copies) {
  CoeffTuple t;
  t.reserve(rest.size() + gens.size() * copies);
  for (const auto& c : rest) t.push_back(c.value);
  for (const Complex& w : gens) t.insert(t.end(), copies, w);
  return t;
}

GapReport run_search(const AtomDistribution& dist, const CoeffTuple& V, std::size_t n, double eps, double mu,
                     std::size_t k, std::size_t d_max, const SearchBudget& budget, std::uint64_t seed) {
  if (V.empty()) throw std::invalid_argument("structure_search: V must be nonempty");
  if (k < 2) throw std::invalid_argument("structure_search: k must be >= 2");
  if (d_max < 1) throw std::invalid_argument("structure_search: d_max must be >= 1");
  GapReport rep;
  rep.k = k;
  rep.mu = mu;
  const std::size_t k2 = k * k;
  const double growth = std::pow(static_cast<double>(n), eps);
  std::vector<Coordinate> current;
  current.reserve(V.size());
  for (std::size_t j = 0; j < V.size(); ++j) current.push_back({j, V[j]});

  double base_disp = 1.0;
  while (true) {
    // Step 1: which coordinates grow the dispersion by n^eps.
    std::vector<double> disp(current.size(), 0.0);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::size_t j = 0; j < current.size(); ++j) {
      try {
        std::vector<Complex> gens = rep.generators;
        gens.push_back(current[j].value);
        disp[j] = gap_dispersion(gens, k, budget.gap_cap);
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) {
      try {
        std::rethrow_exception(failure);
      } catch (const CapExceeded&) {
        rep.stop_reason = "gap enumeration cap";
        break;
      }
    }
    std::vector<std::size_t> growing;
    for (std::size_t j = 0; j < current.size(); ++j) {
      if (disp[j] >= growth * base_disp) growing.push_back(j);
    }
    rep.final_growing_count = growing.size();
    if (growing.size() < k2) {
      rep.terminated_normally = true;
      rep.stop_reason = "fewer than k^2 growing coordinates";
      break;
    }

    // Step 2: the first k^2 growing coordinates are deleted; the one whose
    // k^2-fold repetition keeps P largest becomes the next generator.
    growing.resize(k2);
    std::vector<char> removed(current.size(), 0);
    for (std::size_t j : growing) removed[j] = 1;
    std::vector<Coordinate> rest;
    for (std::size_t j = 0; j < current.size(); ++j) {
      if (!removed[j]) rest.push_back(current[j]);
    }
    SearchStep step;
    step.growing_count = rep.final_growing_count;
    step.dispersion_before = base_disp;
    const std::uint64_t step_seed = mix(seed, rep.generators.size());
    step.score_before = score_concentration(dist, mu, assemble(current, rep.generators, k2), budget, step_seed).value;
    const CoeffTuple base = assemble(rest, rep.generators, k2);
    double best = -1.0;
    std::size_t best_j = growing.front();
    for (std::size_t j : growing) {
      CoeffTuple t = base;
      t.insert(t.end(), k2, current[j].value);
      const ProbEstimate est = score_concentration(dist, mu, t, budget, mix(step_seed, current[j].index));
      if (est.value > best) {
        best = est.value;
        best_j = j;
        step.score_method = est.method;
      }
    }
    step.chosen_index = current[best_j].index;
    step.generator = current[best_j].value;
    step.score_after = best;
    step.dispersion_after = disp[best_j];
    rep.generators.push_back(current[best_j].value);
    rep.trace.push_back(step);
    base_disp = disp[best_j];
    current = std::move(rest);
    if (rep.generators.size() >= d_max) {
      rep.stop_reason = "d_max reached";
      break;
    }
  }
  rep.r = rep.generators.size();
  rep.dispersion_final = base_disp;
  rep.exceptional_count = rep.r * k2;
  return rep;
}

}  // namespace

std::string to_string(Verdict v) { return v == Verdict::poor ? "poor" : "rich"; }

RichPoorVerdict classify_rich_poor(const AtomDistribution& dist, const CoeffTuple& v, std::size_t n, double A,
                                   double B, const SmallBallBudget& budget) {
  if (n < 1) throw std::invalid_argument("classify_rich_poor: n must be >= 1");
  double norm2 = 0.0;
  for (const Complex& z : v) norm2 += std::norm(z);
  if (v.empty() || std::abs(std::sqrt(norm2) - 1.0) > 1e-9) {
    throw std::invalid_argument("classify_rich_poor: v must be a unit vector");
  }
  RichPoorVerdict out;
  out.A = A;
  out.B = B;
  const double nd = static_cast<double>(n);
  out.beta = std::pow(nd, -B + 0.5);
  out.threshold = std::pow(nd, -A - 1.0);
  out.p_est = small_ball_prob(dist, v, out.beta, budget);
  const bool below = out.p_est.value + 3.0 * out.p_est.std_error <= out.threshold;
  out.verdict = below && !out.p_est.lower_bound_only ? Verdict::poor : Verdict::rich;
  return out;
}

CoeffTuple round_to_lattice_spacing(const CoeffTuple& v, double beta, double spacing) {
  if (!(beta > 0.0)) throw std::invalid_argument("round_to_lattice: beta must be positive");
  if (!(spacing > 0.0)) throw std::invalid_argument("round_to_lattice: spacing must be positive");
  if (1.0 / beta > 1e12) throw std::overflow_error("round_to_lattice: beta^{-1} exceeds 1e12");
  CoeffTuple out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    const Complex target = v[j] / (2.0 * beta);
    out[j] = Complex(round_coordinate(target.real(), spacing), round_coordinate(target.imag(), spacing));
  }
  return out;
}

CoeffTuple round_to_lattice(const CoeffTuple& v, double beta, std::size_t n, double A) {
  if (n < 1) throw std::invalid_argument("round_to_lattice: n must be >= 1");
  return round_to_lattice_spacing(v, beta, std::pow(static_cast<double>(n), -A - 20.0));
}

ProbEstimate score_concentration(const AtomDistribution& dist, double mu, const CoeffTuple& v,
                                 const SearchBudget& budget, std::uint64_t seed) {
  if (const auto p = conc_prob_exact(dist, mu, v, budget.support_cap)) return {*p, 0.0, ProbMethod::exact_enumeration};
  if (dist.char_fn_exact() && fourier_node_count(dist, v) <= budget.fourier_node_limit) {
    return conc_prob_fourier(dist, mu, v);
  }
  return conc_prob_mc(dist, mu, v, budget.mc_trials, seed, false);
}

GapReport structure_search(const AtomDistribution& dist, const CoeffTuple& V, std::size_t n, double eps,
                           std::size_t d_max, const SearchBudget& budget, std::uint64_t seed) {
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("structure_search: eps must lie in (0, 1/2)");
  const auto k = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), 0.5 - eps)));
  return run_search(dist, V, n, eps, 1.0, k, d_max, budget, seed);
}

GapReport structure_search_sparse(const AtomDistribution& dist, const CoeffTuple& V, std::size_t n, double eps,
                                  double rho, std::size_t d_max, const SearchBudget& budget, std::uint64_t seed) {
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("structure_search: eps must lie in (0, 1/2)");
  if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("structure_search_sparse: rho must lie in (0, 1]");
  const double m = std::pow(static_cast<double>(n), eps);
  const auto k = static_cast<std::size_t>(std::floor(std::sqrt(m / rho)));
  return run_search(dist, V, n, eps, rho, k, d_max, budget, seed);
}

double log_net_size_bound(std::size_t n, double eps, double p, double o_n_constant) {
  if (n < 2) throw std::invalid_argument("net_size_bound: n must be >= 2");
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("net_size_bound: eps must lie in (0, 1]");
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("net_size_bound: p must lie in (0, 1]");
  const double nd = static_cast<double>(n);
  const double a = nd * (eps - 0.5) * std::log(nd) - nd * std::log(p);
  const double b = o_n_constant * nd / std::log(nd);
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double net_size_bound(std::size_t n, double eps, double p, double o_n_constant) {
  return std::exp(log_net_size_bound(n, eps, p, o_n_constant));
}

std::string format_generators(const std::vector<Complex>& gens) {
  std::string out;
  for (std::size_t j = 0; j < gens.size(); ++j) {
    if (j) out += ';';
    out += format_complex(gens[j]);
  }
  return out;
}

}  // namespace circlaw
