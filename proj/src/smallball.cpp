#include "circlaw/smallball.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_map>

#include "circlaw/kernels.hpp"
#include "circlaw/quadrature.hpp"
#include "circlaw/rng.hpp"

namespace circlaw {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kInternalDraws = 1 << 17;
constexpr std::uint64_t kInternalSeed = 0xa17a0a17aULL;

// Uniform grid over the plane for radius queries on weighted points.
class PointIndex {
 public:
  PointIndex(const std::vector<Atom>& points, double cell) : points_(points), cell_(cell) {
    for (std::size_t k = 0; k < points_.size(); ++k) cells_[key_of(points_[k].value)].push_back(k);
  }

  double mass_within(Complex c, double r) const {
    const double lim = r + tolerance(r);
    const auto [cx, cy] = coords(c);
    double m = 0.0;
    for (long long dx = -1; dx <= 1; ++dx) {
      for (long long dy = -1; dy <= 1; ++dy) {
        const auto it = cells_.find(pack(cx + dx, cy + dy));
        if (it == cells_.end()) continue;
        for (std::size_t k : it->second) {
          if (std::abs(points_[k].value - c) <= lim) m += points_[k].prob;
        }
      }
    }
    return m;
  }

  template <typename F>
  void for_each_neighbour(std::size_t i, F&& f) const {
    const auto [cx, cy] = coords(points_[i].value);
    for (long long dx = -1; dx <= 1; ++dx) {
      for (long long dy = -1; dy <= 1; ++dy) {
        const auto it = cells_.find(pack(cx + dx, cy + dy));
        if (it == cells_.end()) continue;
        for (std::size_t k : it->second) f(k);
      }
    }
  }

  static double tolerance(double r) { return 1e-10 * r + 1e-13; }

 private:
  std::pair<long long, long long> coords(Complex z) const {
    return {static_cast<long long>(std::floor(z.real() / cell_)), static_cast<long long>(std::floor(z.imag() / cell_))};
  }
  static std::uint64_t pack(long long x, long long y) {
    return mix(static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(y));
  }
  std::uint64_t key_of(Complex z) const {
    const auto [x, y] = coords(z);
    return pack(x, y);
  }

  const std::vector<Atom>& points_;
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

std::vector<Atom> convolve(const std::vector<Atom>& law, const std::vector<Atom>& step) {
  std::vector<Atom> out;
  out.reserve(law.size() * step.size());
  for (const Atom& a : law) {
    for (const Atom& b : step) out.push_back({a.value + b.value, a.prob * b.prob});
  }
  return merge_atoms(std::move(out));
}

std::optional<std::vector<Atom>> convolve_all(const std::vector<Atom>& step_law, const CoeffTuple& v,
                                              std::size_t cap) {
  std::vector<Atom> law{{0.0, 1.0}};
  for (const Complex& vi : v) {
    if (vi == Complex(0.0, 0.0)) continue;
    std::vector<Atom> step = step_law;
    for (Atom& a : step) a.value *= vi;
    if (law.size() * step.size() > cap * 16) return std::nullopt;
    law = convolve(law, step);
    if (law.size() > cap) return std::nullopt;
  }
  return law;
}

// E ||X||^2_{R/Z} for X ~ N(0, s^2).
double wrapped_normal_sq_norm(double s) {
  if (s == 0.0) return 0.0;
  if (s <= 0.25) {
    // Central cell in closed form, neighbouring cells by quadrature.
    const double h = 0.5 / s;
    double total = s * s * (std::erf(h / std::numbers::sqrt2) - std::sqrt(2.0 / kPi) * h * std::exp(-0.5 * h * h));
    static const QuadratureRule unit = gauss_legendre(64, -0.5, 0.5);
    double outer = 0.0;
    for (int j = -4; j <= 4; ++j) {
      if (j == 0) continue;
      for (std::size_t k = 0; k < unit.nodes.size(); ++k) {
        const double u = unit.nodes[k];
        const double x = j + u;
        outer += unit.weights[k] * u * u * std::exp(-0.5 * x * x / (s * s));
      }
    }
    return total + outer / (s * std::sqrt(2.0 * kPi));
  }
  double total = 1.0 / 12.0;
  for (int k = 1; k <= 40; ++k) {
    total += (k % 2 ? -1.0 : 1.0) * std::exp(-2.0 * kPi * kPi * k * k * s * s) / (kPi * kPi * k * k);
  }
  return total;
}

double frac_dist_sq(double x) {
  const double d = x - std::nearbyint(x);
  return d * d;
}

// Largest |a_1 - a_2| (or a Gaussian-scale proxy) for node-count selection.
double difference_spread(const AtomDistribution& dist) {
  if (dist.has_exact_enumeration()) {
    double lo_re = std::numeric_limits<double>::infinity(), hi_re = -lo_re;
    double lo_im = lo_re, hi_im = -lo_re;
    for (const Atom& a : dist.support()) {
      lo_re = std::min(lo_re, a.value.real());
      hi_re = std::max(hi_re, a.value.real());
      lo_im = std::min(lo_im, a.value.imag());
      hi_im = std::max(hi_im, a.value.imag());
    }
    return std::hypot(hi_re - lo_re, hi_im - lo_im);
  }
  return 8.0 * std::sqrt(2.0 * dist.second_moment());
}

double fourier_rule(const AtomDistribution& dist, double mu, const CoeffTuple& v, double radius, std::size_t n_r,
                    std::size_t n_a) {
  const QuadratureRule radial = gauss_legendre(n_r, 0.0, radius);
  const double dtheta = 2.0 * kPi / static_cast<double>(n_a);
  std::vector<Complex> dirs(n_a);
  for (std::size_t j = 0; j < n_a; ++j) dirs[j] = std::polar(1.0, dtheta * static_cast<double>(j));
  const double keep = 1.0 - 0.5 * mu;
  // Repeated coefficients contribute a power of one factor.
  std::vector<std::pair<Complex, double>> groups;
  for (const Complex& vi : v) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == vi; });
    if (it == groups.end()) {
      groups.emplace_back(vi, 1.0);
    } else {
      it->second += 1.0;
    }
  }
  auto term = [&](std::size_t k) {
    const std::size_t i = k / n_a;
    const std::size_t j = k % n_a;
    const double rho = radial.nodes[i];
    const Complex xi = rho * dirs[j];
    double prod = std::exp(-kPi * rho * rho);
    for (const auto& [vi, count] : groups) prod *= std::pow(keep + 0.5 * mu * char_fn_f(dist, xi * vi), count);
    return radial.weights[i] * rho * dtheta * prod;
  };
  return omp::block_sum(n_r * n_a, term);
}

// The Gaussian weight makes |xi| > 4.5 negligible (exp(-pi 4.5^2) ~ 2.6e-28).
constexpr double kFourierRadius = 4.5;

std::pair<std::size_t, std::size_t> fourier_nodes(const AtomDistribution& dist, const CoeffTuple& v,
                                                  double radius_cutoff) {
  const double radius = std::min(radius_cutoff, kFourierRadius);
  double bandwidth = 0.0;
  const double spread = difference_spread(dist);
  for (const Complex& vi : v) bandwidth += std::abs(vi) * spread;
  const auto n_r = static_cast<std::size_t>(std::max(256.0, std::ceil(3.0 * bandwidth * radius) + 48.0));
  const auto n_a = static_cast<std::size_t>(std::max(256.0, std::ceil(2.5 * kPi * radius * bandwidth) + 48.0));
  return {n_r, n_a};
}

}  // namespace

double fourier_node_count(const AtomDistribution& dist, const CoeffTuple& v, double radius_cutoff) {
  const auto [n_r, n_a] = fourier_nodes(dist, v, radius_cutoff);
  return static_cast<double>(n_r) * static_cast<double>(n_a);
}

std::string to_string(ProbMethod m) {
  switch (m) {
    case ProbMethod::exact_enumeration:
      return "exact_enumeration";
    case ProbMethod::monte_carlo:
      return "monte_carlo";
    case ProbMethod::fourier_quadrature:
      return "fourier_quadrature";
  }
  return "unknown";
}

std::vector<Complex> walk_sample(const AtomDistribution& dist, const CoeffTuple& v, std::uint64_t seed,
                                 std::size_t count) {
  if (count == 0) throw std::invalid_argument("walk_sample: count must be >= 1");
  std::vector<Complex> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    CounterRng rng(seed, kStreamWalk, k);
    Complex w = 0.0;
    for (const Complex& vi : v) w += vi * dist.sample(rng);
    out[k] = w;
  }
  return out;
}

std::optional<std::vector<Atom>> walk_support(const AtomDistribution& dist, const CoeffTuple& v, std::size_t cap) {
  if (!dist.has_exact_enumeration()) return std::nullopt;
  return convolve_all(dist.support(), v, cap);
}

double max_ball_mass(const std::vector<Atom>& points, double r, std::size_t max_centers, bool* exhausted) {
  if (exhausted) *exhausted = false;
  if (points.empty()) return 0.0;
  if (!(r >= 0.0)) throw std::invalid_argument("max_ball_mass: r must be >= 0");
  double best = 0.0;
  if (r == 0.0) {
    for (const Atom& a : points) best = std::max(best, a.prob);
    return best;
  }
  // Some optimal closed disk has an atom on its boundary. For each atom p, sweep
  // the centre p + r e^{i theta}; neighbour q is covered on an arc of theta.
  const PointIndex index(points, 2.0 * r);
  constexpr double kTwoPi = 2.0 * kPi;
  constexpr double kArcSlack = 1e-9;
  const double reach = 2.0 * r + PointIndex::tolerance(r);
  std::size_t examined = 0;
  std::vector<std::pair<double, int>> events;
  for (std::size_t i = 0; i < points.size(); ++i) {
    events.clear();
    double base = 0.0;
    double wrapped = 0.0;
    index.for_each_neighbour(i, [&](std::size_t j) {
      const Complex d = points[j].value - points[i].value;
      const double dist = std::abs(d);
      if (dist > reach) return;
      if (j == i || dist == 0.0) {
        base += points[j].prob;
        return;
      }
      const double half = std::acos(std::min(1.0, dist / (2.0 * r))) + kArcSlack;
      if (half >= kPi) {
        base += points[j].prob;
        return;
      }
      double lo = std::arg(d) - half;
      double hi = std::arg(d) + half;
      if (lo < 0.0) lo += kTwoPi, hi += kTwoPi;
      if (hi >= kTwoPi) {
        wrapped += points[j].prob;
        hi -= kTwoPi;
      }
      events.emplace_back(lo, static_cast<int>(j) + 1);
      events.emplace_back(hi, -(static_cast<int>(j) + 1));
    });
    // Entries before exits at equal angles so touching arcs overlap.
    std::sort(events.begin(), events.end(), [](const auto& x, const auto& y) {
      if (x.first != y.first) return x.first < y.first;
      return (x.second > 0) > (y.second > 0);
    });
    double active = base + wrapped;
    best = std::max(best, active);
    for (const auto& [angle, tag] : events) {
      const double w = points[static_cast<std::size_t>(std::abs(tag) - 1)].prob;
      active += tag > 0 ? w : -w;
      best = std::max(best, active);
    }
    examined += 1 + events.size() / 2;
    if (examined >= max_centers && i + 1 < points.size()) {
      if (exhausted) *exhausted = true;
      break;
    }
  }
  return std::min(best, 1.0);
}

ProbEstimate small_ball_prob(const AtomDistribution& dist, const CoeffTuple& v, double r,
                             const SmallBallBudget& budget) {
  if (!(r >= 0.0)) throw std::invalid_argument("small_ball_prob: r must be >= 0");
  if (const auto support = walk_support(dist, v, budget.support_cap)) {
    ProbEstimate est;
    bool exhausted = false;
    est.value = max_ball_mass(*support, r, budget.max_centers, &exhausted);
    est.lower_bound_only = exhausted;
    return est;
  }
  if (budget.samples < 2) throw std::invalid_argument("small_ball_prob: need at least 2 samples");
  const std::vector<Complex> draws = walk_sample(dist, v, budget.seed, budget.samples);
  const std::size_t half = draws.size() / 2;
  std::vector<Atom> select;
  select.reserve(half);
  for (std::size_t k = 0; k < half; ++k) select.push_back({draws[k], 1.0});

  ProbEstimate est;
  est.method = ProbMethod::monte_carlo;
  Complex centre = select.front().value;
  if (r > 0.0) {
    const PointIndex index(select, 2.0 * r);
    double best = -1.0;
    std::size_t examined = 0;
    auto consider = [&](Complex c) {
      const double m = index.mass_within(c, r);
      if (m > best) {
        best = m;
        centre = c;
      }
      ++examined;
    };
    for (const Atom& a : select) {
      if (examined >= budget.max_centers) break;
      consider(a.value);
    }
    double lo_re = std::numeric_limits<double>::infinity(), hi_re = -lo_re, lo_im = lo_re, hi_im = -lo_re;
    for (const Atom& a : select) {
      lo_re = std::min(lo_re, a.value.real());
      hi_re = std::max(hi_re, a.value.real());
      lo_im = std::min(lo_im, a.value.imag());
      hi_im = std::max(hi_im, a.value.imag());
    }
    const double nx = std::floor((hi_re - lo_re) / r) + 1.0;
    const double ny = std::floor((hi_im - lo_im) / r) + 1.0;
    if (nx * ny + static_cast<double>(examined) <= static_cast<double>(budget.max_centers)) {
      for (double ix = 0; ix < nx; ++ix) {
        for (double iy = 0; iy < ny; ++iy) consider(Complex(lo_re + ix * r, lo_im + iy * r));
      }
    } else {
      est.lower_bound_only = true;
    }
  } else {
    // r = 0: the heaviest repeated value among the selection draws.
    std::vector<Atom> merged = merge_atoms(select);
    double best = -1.0;
    for (const Atom& a : merged) {
      if (a.prob > best) {
        best = a.prob;
        centre = a.value;
      }
    }
  }
  const std::size_t eval = draws.size() - half;
  std::size_t hits = 0;
  const double lim = r + PointIndex::tolerance(r);
  for (std::size_t k = half; k < draws.size(); ++k) hits += std::abs(draws[k] - centre) <= lim;
  est.value = static_cast<double>(hits) / static_cast<double>(eval);
  est.std_error = std::sqrt(std::max(est.value * (1.0 - est.value), 1.0 / eval) / static_cast<double>(eval));
  return est;
}

double char_fn_f(const AtomDistribution& dist, Complex z) {
  return std::clamp(std::norm(dist.char_fn(z)), 0.0, 1.0);
}

double alpha_norm(const AtomDistribution& dist, Complex w) {
  if (w == Complex(0.0, 0.0)) return 0.0;
  if (dist.has_exact_enumeration()) {
    double s = 0.0;
    for (const Atom& d : difference_law(dist)) s += d.prob * frac_dist_sq((w * d.value).real());
    return std::sqrt(s);
  }
  switch (dist.kind()) {
    case AtomKind::real_gaussian:
      return std::sqrt(wrapped_normal_sq_norm(std::numbers::sqrt2 * std::abs(w.real())));
    case AtomKind::complex_gaussian:
      return std::sqrt(wrapped_normal_sq_norm(std::abs(w)));
    case AtomKind::rotated:
      return alpha_norm(*dist.base(), w * std::polar(1.0, dist.theta()));
    default:
      break;
  }
  double s = 0.0;
  for (std::size_t k = 0; k < kInternalDraws; ++k) {
    CounterRng rng(kInternalSeed, kStreamAux, k);
    const Complex a1 = dist.sample(rng);
    const Complex a2 = dist.sample(rng);
    s += frac_dist_sq((w * (a1 - a2)).real());
  }
  return std::sqrt(s / static_cast<double>(kInternalDraws));
}

std::vector<Atom> lazy_difference_law(const AtomDistribution& dist, double mu) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("lazy_difference_law: mu must lie in [0, 1]");
  std::vector<Atom> law = difference_law(dist);
  for (Atom& a : law) a.prob *= 0.5 * mu;
  law.push_back({0.0, 1.0 - 0.5 * mu});
  return merge_atoms(std::move(law));
}

std::optional<double> conc_prob_exact(const AtomDistribution& dist, double mu, const CoeffTuple& v,
                                      std::size_t support_cap) {
  if (!dist.has_exact_enumeration()) return std::nullopt;
  const auto law = convolve_all(lazy_difference_law(dist, mu), v, support_cap);
  if (!law) return std::nullopt;
  double p = 0.0;
  for (const Atom& a : *law) p += a.prob * std::exp(-kPi * std::norm(a.value));
  return std::clamp(p, 0.0, 1.0);
}

ProbEstimate conc_prob_mc(const AtomDistribution& dist, double mu, const CoeffTuple& v, std::size_t trials,
                          std::uint64_t seed, bool allow_exact, std::size_t support_cap) {
  if (!(mu > 0.0 && mu <= 1.0)) throw std::invalid_argument("conc_prob: mu must lie in (0, 1]");
  if (trials < 1) throw std::invalid_argument("conc_prob_mc: trials must be >= 1");
  if (allow_exact) {
    if (const auto p = conc_prob_exact(dist, mu, v, support_cap)) return {*p, 0.0, ProbMethod::exact_enumeration};
  }
  const double half_mu = 0.5 * mu;
  auto term = [&](std::size_t k) {
    CounterRng rng(seed, kStreamWalk, k);
    Complex w = 0.0;
    for (const Complex& vi : v) {
      const Complex a1 = dist.sample(rng);
      const Complex a2 = dist.sample(rng);
      if (rng.uniform() < half_mu) w += vi * (a1 - a2);
    }
    return std::exp(-kPi * std::norm(w));
  };
  const SumPair sp = omp::block_moments(trials, term);
  const double m = static_cast<double>(trials);
  ProbEstimate est;
  est.method = ProbMethod::monte_carlo;
  est.value = sp.sum / m;
  est.std_error = trials > 1 ? std::sqrt(std::max(0.0, (sp.sum_sq - m * est.value * est.value) / (m - 1.0)) / m) : 0.0;
  return est;
}

ProbEstimate conc_prob_fourier(const AtomDistribution& dist, double mu, const CoeffTuple& v, double radius_cutoff) {
  if (!(radius_cutoff > 0.0)) throw std::invalid_argument("conc_prob_fourier: radius_cutoff must be positive");
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("conc_prob_fourier: mu must lie in [0, 1]");
  if (!dist.char_fn_exact()) {
    throw std::invalid_argument("conc_prob_fourier: law has no closed-form characteristic function");
  }
  const auto [n_r, n_a] = fourier_nodes(dist, v, radius_cutoff);
  const double radius = std::min(radius_cutoff, kFourierRadius);
  const double fine = fourier_rule(dist, mu, v, radius, n_r, n_a);
  const double coarse = fourier_rule(dist, mu, v, radius, (n_r + 1) / 2, (n_a + 1) / 2);
  ProbEstimate est;
  est.method = ProbMethod::fourier_quadrature;
  est.value = std::clamp(fine, 0.0, 1.0);
  est.std_error = std::abs(fine - coarse) + std::exp(-kPi * radius * radius);
  return est;
}

CoeffTuple repeat_tuple(const CoeffTuple& v, std::size_t k) {
  CoeffTuple out;
  out.reserve(v.size() * k);
  for (std::size_t r = 0; r < k; ++r) out.insert(out.end(), v.begin(), v.end());
  return out;
}

CoeffTuple concat(const CoeffTuple& v, const CoeffTuple& w) {
  CoeffTuple out = v;
  out.insert(out.end(), w.begin(), w.end());
  return out;
}

}  // namespace circlaw
