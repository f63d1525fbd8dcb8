#include "circlaw/gap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <unordered_map>

#include "circlaw/kernels.hpp"
#include "circlaw/rng.hpp"

namespace circlaw {

namespace {

constexpr std::int64_t kMaxDenominator = 1000000;
constexpr std::int64_t kMaxCommonDenominator = 1000000000000LL;
constexpr double kFloatLattice = 1e-9;

struct Rational {
  std::int64_t num;
  std::int64_t den;
};

// Continued-fraction search for p/q with q <= 10^6 reproducing x to a few ulps.
std::optional<Rational> as_rational(double x) {
  if (!std::isfinite(x)) return std::nullopt;
  if (std::abs(x) > 1e12) return std::nullopt;
  const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x));
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double frac = x;
  for (int step = 0; step < 64; ++step) {
    const double a = std::floor(frac);
    if (std::abs(a) > 1e13) break;
    const auto ai = static_cast<std::int64_t>(a);
    const std::int64_t p2 = ai * p1 + p0;
    const std::int64_t q2 = ai * q1 + q0;
    if (q2 > kMaxDenominator) break;
    if (std::abs(x - static_cast<double>(p2) / static_cast<double>(q2)) <= tol) return Rational{p2, q2};
    const double rest = frac - a;
    if (rest == 0.0) break;
    frac = 1.0 / rest;
    p0 = p1, q0 = q1, p1 = p2, q1 = q2;
  }
  return std::nullopt;
}

struct KeyHash {
  std::size_t operator()(const std::pair<std::int64_t, std::int64_t>& k) const noexcept {
    return static_cast<std::size_t>(mix(static_cast<std::uint64_t>(k.first), static_cast<std::uint64_t>(k.second)));
  }
};

std::vector<std::int64_t> floor_dims(const Gap& gap) {
  std::vector<std::int64_t> m(gap.rank());
  for (std::size_t j = 0; j < gap.rank(); ++j) m[j] = static_cast<std::int64_t>(std::floor(gap.dims[j]));
  return m;
}

// Visits every coefficient vector n with |n_j| <= m_j in odometer order.
template <typename Visit>
void odometer(const std::vector<std::int64_t>& m, Visit&& visit) {
  const std::size_t r = m.size();
  std::vector<std::int64_t> n(r);
  for (std::size_t j = 0; j < r; ++j) n[j] = -m[j];
  while (true) {
    visit(n);
    std::size_t j = 0;
    for (; j < r; ++j) {
      if (n[j] < m[j]) {
        ++n[j];
        break;
      }
      n[j] = -m[j];
    }
    if (j == r) return;
  }
}

struct IntPoint {
  std::int64_t re = 0, im = 0;
};

std::optional<std::pair<std::int64_t, std::vector<IntPoint>>> integer_generators(const Gap& gap) {
  std::vector<Rational> parts;
  std::int64_t den = 1;
  for (const Complex& g : gap.generators) {
    for (double x : {g.real(), g.imag()}) {
      const auto q = as_rational(x);
      if (!q) return std::nullopt;
      parts.push_back(*q);
      den = std::lcm(den, q->den);
      if (den > kMaxCommonDenominator) return std::nullopt;
    }
  }
  std::vector<IntPoint> ints(gap.rank());
  const auto m = floor_dims(gap);
  long double reach = 0.0L;
  for (std::size_t j = 0; j < gap.rank(); ++j) {
    const Rational& a = parts[2 * j];
    const Rational& b = parts[2 * j + 1];
    const long double ra = static_cast<long double>(a.num) * (den / a.den);
    const long double rb = static_cast<long double>(b.num) * (den / b.den);
    if (std::abs(ra) > 4e18L || std::abs(rb) > 4e18L) return std::nullopt;
    ints[j] = {a.num * (den / a.den), b.num * (den / b.den)};
    reach += static_cast<long double>(m[j]) * (std::abs(ra) + std::abs(rb));
  }
  if (reach > 4e18L) return std::nullopt;
  return std::make_pair(den, std::move(ints));
}

bool key_within(const std::pair<std::int64_t, std::int64_t>& key, std::int64_t den, double radius) {
  const __int128 norm = static_cast<__int128>(key.first) * key.first + static_cast<__int128>(key.second) * key.second;
  const long double scaled = static_cast<long double>(radius) * static_cast<long double>(den);
  if (scaled == std::floor(scaled) && scaled < 1e18L) {
    const auto s = static_cast<__int128>(scaled);
    return norm <= s * s;
  }
  return static_cast<long double>(norm) <= scaled * scaled;
}

}  // namespace

Gap::Gap(std::vector<Complex> gens, std::vector<double> ds) : generators(std::move(gens)), dims(std::move(ds)) {
  if (generators.empty()) throw std::invalid_argument("Gap: rank must be >= 1");
  if (generators.size() != dims.size()) throw std::invalid_argument("Gap: generators and dims differ in length");
  for (double L : dims) {
    if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("Gap: dims must be positive");
  }
  for (const Complex& g : generators) {
    if (!std::isfinite(g.real()) || !std::isfinite(g.imag())) throw std::invalid_argument("Gap: generators must be finite");
  }
}

std::uint64_t multiplicity(const Gap& gap, std::uint64_t cap) {
  long double total = 1.0L;
  std::uint64_t exact = 1;
  for (const auto m : floor_dims(gap)) {
    const auto width = static_cast<std::uint64_t>(2 * m + 1);
    total *= static_cast<long double>(width);
    if (total > static_cast<long double>(cap)) {
      throw CapExceeded("GAP enumeration", total > 1.8e19L ? UINT64_MAX : static_cast<std::uint64_t>(total), cap);
    }
    exact *= width;
  }
  return exact;
}

std::size_t GapPoints::count_within(double radius, Complex centre) const {
  std::size_t c = 0;
  if (exact_arithmetic && centre == Complex(0.0, 0.0)) {
    for (const auto& k : keys) c += key_within(k, denominator, radius);
    return c;
  }
  const double lim = radius * (1.0 + 1e-12) + 1e-12;
  for (const Complex& z : points) c += std::abs(z - centre) <= lim;
  return c;
}

GapPoints enumerate(const Gap& gap, std::uint64_t cap) {
  GapPoints out;
  out.multiplicity_total = multiplicity(gap, cap);
  const auto m = floor_dims(gap);
  if (auto ints = integer_generators(gap)) {
    out.exact_arithmetic = true;
    out.denominator = ints->first;
    const auto& g = ints->second;
    out.keys.reserve(static_cast<std::size_t>(out.multiplicity_total));
    odometer(m, [&](const std::vector<std::int64_t>& n) {
      std::int64_t re = 0, im = 0;
      for (std::size_t j = 0; j < n.size(); ++j) {
        re += n[j] * g[j].re;
        im += n[j] * g[j].im;
      }
      out.keys.emplace_back(re, im);
    });
    std::sort(out.keys.begin(), out.keys.end());
    out.keys.erase(std::unique(out.keys.begin(), out.keys.end()), out.keys.end());
    const auto den = static_cast<double>(out.denominator);
    out.points.reserve(out.keys.size());
    for (const auto& k : out.keys) out.points.emplace_back(static_cast<double>(k.first) / den, static_cast<double>(k.second) / den);
    return out;
  }
  std::unordered_map<std::pair<std::int64_t, std::int64_t>, Complex, KeyHash> seen;
  seen.reserve(static_cast<std::size_t>(out.multiplicity_total));
  odometer(m, [&](const std::vector<std::int64_t>& n) {
    Complex s = 0.0;
    for (std::size_t j = 0; j < n.size(); ++j) s += static_cast<double>(n[j]) * gap.generators[j];
    seen.emplace(std::make_pair(std::llround(s.real() / kFloatLattice), std::llround(s.imag() / kFloatLattice)), s);
  });
  std::vector<std::pair<std::int64_t, std::int64_t>> keys;
  keys.reserve(seen.size());
  for (const auto& [k, unused] : seen) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  out.points.reserve(keys.size());
  for (const auto& k : keys) out.points.push_back(seen.at(k));
  return out;
}

bool is_proper(const Gap& gap, std::uint64_t cap) {
  const GapPoints q = enumerate(gap, cap);
  return q.size() == q.multiplicity_total;
}

Gap dilate(const Gap& gap, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("dilate: t must be positive");
  Gap out = gap;
  for (double& L : out.dims) L *= t;
  return out;
}

double dispersion(const GapPoints& q) {
  const std::size_t inner = q.count_within(1.0);
  if (inner == 0) throw std::logic_error("dispersion: point set misses the origin");
  return static_cast<double>(q.size()) / static_cast<double>(inner);
}

double dispersion(const Gap& gap, std::uint64_t cap) { return dispersion(enumerate(gap, cap)); }

std::vector<Complex> epsilon_net(const std::vector<Complex>& points, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("epsilon_net: eps must be positive");
  std::vector<Complex> net;
  std::unordered_map<std::pair<std::int64_t, std::int64_t>, std::vector<std::size_t>, KeyHash> cells;
  auto cell = [eps](Complex z) {
    return std::make_pair(static_cast<std::int64_t>(std::floor(z.real() / eps)),
                          static_cast<std::int64_t>(std::floor(z.imag() / eps)));
  };
  for (const Complex& z : points) {
    const auto [cx, cy] = cell(z);
    bool covered = false;
    for (std::int64_t dx = -1; dx <= 1 && !covered; ++dx) {
      for (std::int64_t dy = -1; dy <= 1 && !covered; ++dy) {
        const auto it = cells.find({cx + dx, cy + dy});
        if (it == cells.end()) continue;
        for (std::size_t k : it->second) {
          if (std::abs(net[k] - z) <= eps) {
            covered = true;
            break;
          }
        }
      }
    }
    if (!covered) {
      cells[{cx, cy}].push_back(net.size());
      net.push_back(z);
    }
  }
  return net;
}

PigeonholeCount pigeonhole_count(const std::vector<Complex>& q, const std::vector<Ball>& omega_cover, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("pigeonhole: r must be positive");
  for (const Ball& b : omega_cover) {
    if (b.radius < 0.0 || b.radius > 0.5 * r * (1.0 + 1e-12)) {
      throw std::invalid_argument("pigeonhole: cover balls must have radius at most r/2");
    }
  }
  std::vector<Complex> pts = merge_points(q);
  PigeonholeCount out;
  out.cover_size = omega_cover.size();
  for (const Complex& z : pts) {
    for (const Ball& b : omega_cover) {
      if (std::abs(z - b.centre) <= b.radius * (1.0 + 1e-12)) {
        ++out.q_in_omega;
        break;
      }
    }
  }
  std::vector<Complex> diffs;
  for (const Complex& a : pts) {
    for (const Complex& b : pts) {
      const Complex d = a - b;
      if (std::abs(d) <= r * (1.0 + 1e-12)) diffs.push_back(d);
    }
  }
  out.differences_in_ball = merge_points(diffs).size();
  out.holds = static_cast<double>(out.differences_in_ball) * static_cast<double>(out.cover_size) >=
              static_cast<double>(out.q_in_omega);
  return out;
}

bool pigeonhole_check(const std::vector<Complex>& q, const std::vector<Ball>& omega_cover, double r) {
  return pigeonhole_count(q, omega_cover, r).holds;
}

std::vector<Complex> merge_points(const std::vector<Complex>& pts) {
  std::map<std::pair<std::int64_t, std::int64_t>, Complex> seen;
  for (const Complex& z : pts) {
    seen.emplace(std::make_pair(std::llround(z.real() / kFloatLattice), std::llround(z.imag() / kFloatLattice)), z);
  }
  std::vector<Complex> out;
  out.reserve(seen.size());
  for (const auto& [k, z] : seen) out.push_back(z);
  return out;
}

LacunaryBasis lacunary_basis(const Gap& gap, double K, double R, std::uint64_t cap, double c_r) {
  if (!(K >= 2.0)) throw std::invalid_argument("lacunary_basis: K must be >= 2");
  if (!(R >= 0.0)) throw std::invalid_argument("lacunary_basis: R must be >= 0");
  if (!(c_r >= 0.0)) throw std::invalid_argument("lacunary_basis: c_r must be >= 0");
  const GapPoints full = enumerate(gap, cap);
  LacunaryBasis out;
  out.K = K;
  out.R = R;
  out.q_size = full.size();
  out.q_in_ball = full.count_within(R);
  const double log_ratio = std::log(static_cast<double>(out.q_size) / static_cast<double>(out.q_in_ball));
  out.d0 = c_r * (1.0 + log_ratio / std::log(K));

  double prev = std::numeric_limits<double>::infinity();
  double product = 1.0;
  if (out.q_in_ball < out.q_size) {
    for (std::size_t i = 1;; ++i) {
      const double t = std::min(1.0, std::exp2(-out.d0 + static_cast<double>(i)));
      const GapPoints qi = enumerate(dilate(gap, t), cap);
      std::vector<Complex> stage;
      for (const Complex& z : qi.points) {
        if (std::isinf(prev) || K * std::abs(z) <= prev) stage.push_back(z);
      }
      // The radius test mirrors the closed-ball count used for #(Q ∩ B(0,R)).
      const double rlim = R * (1.0 + 1e-12) + 1e-12;
      Complex w = 0.0;
      for (const Complex& z : stage) {
        if (std::abs(z) > std::abs(w)) w = z;
      }
      if (std::abs(w) <= rlim) break;
      Complex w2 = 0.0;
      double best_ki = 1.0;
      for (const Complex& z : stage) {
        const double ki = 1.0 + K * std::abs((z / w).imag());
        if (ki > best_ki) {
          best_ki = ki;
          w2 = z;
        }
      }
      out.primary.push_back(w);
      out.secondary.push_back(w2);
      out.ratios.push_back(std::min(best_ki, 1.0 + K));
      product *= K * out.ratios.back();
      prev = std::abs(w);
    }
  }
  out.d = out.primary.size();
  out.many_vectors_ratio = static_cast<double>(out.q_size) / (product * static_cast<double>(out.q_in_ball));
  out.crude_bound_constant = static_cast<double>(out.d) / (1.0 + log_ratio / std::log(K));
  return out;
}

bool in_level_set(const Gap& gap, const AtomDistribution& dist, Complex xi, double scale) {
  for (std::size_t j = 0; j < gap.rank(); ++j) {
    if (alpha_norm(dist, xi * gap.generators[j]) > scale / gap.dims[j]) return false;
  }
  return true;
}

LevelSetMeasure level_set_measure(const Gap& gap, const AtomDistribution& dist, Complex xi0, double eps,
                                  std::size_t samples, std::uint64_t seed, std::uint64_t cap) {
  if (samples < 1000) throw std::invalid_argument("level_set_measure: samples must be >= 1000");
  if (!(eps >= 0.0)) throw std::invalid_argument("level_set_measure: eps must be >= 0");
  LevelSetMeasure out;
  out.dispersion = dispersion(gap, cap);
  out.threshold_scale = std::pow(out.dispersion, eps);
  const double scale = out.threshold_scale;
  const double hits = omp::block_sum(samples, [&](std::size_t k) {
    CounterRng rng(seed, kStreamAux, k);
    const double rad = std::sqrt(rng.uniform());
    const double ang = 2.0 * std::numbers::pi * rng.uniform();
    return in_level_set(gap, dist, xi0 + std::polar(rad, ang), scale) ? 1.0 : 0.0;
  });
  const double n = static_cast<double>(samples);
  const double p = hits / n;
  out.measure = std::numbers::pi * p;
  out.std_error = std::numbers::pi * std::sqrt(p * (1.0 - p) / n);
  return out;
}

ForwardLoResult forward_lo_experiment(const AtomDistribution& dist, double mu, const Gap& gap,
                                      std::optional<ProbMethod> method, std::size_t mc_trials, std::uint64_t seed,
                                      std::uint64_t cap) {
  if (!(mu > 0.0 && mu <= 1.0)) throw std::invalid_argument("forward_lo_experiment: mu must lie in (0, 1]");
  ForwardLoResult out;
  std::size_t length = 0;
  std::vector<std::size_t> copies(gap.rank());
  for (std::size_t j = 0; j < gap.rank(); ++j) {
    copies[j] = static_cast<std::size_t>(std::llround(gap.dims[j] * gap.dims[j]));
    length += copies[j];
  }
  if (length > kForwardTupleCap) throw CapExceeded("forward LO tuple length", length, kForwardTupleCap);
  CoeffTuple v;
  v.reserve(length);
  for (std::size_t j = 0; j < gap.rank(); ++j) v.insert(v.end(), copies[j], gap.generators[j]);
  out.tuple_length = length;
  out.dispersion_scaled = dispersion(dilate(gap, std::sqrt(mu)), cap);

  const bool try_exact = !method || *method == ProbMethod::exact_enumeration;
  if (try_exact) {
    if (const auto p = conc_prob_exact(dist, mu, v)) {
      out.p = {*p, 0.0, ProbMethod::exact_enumeration};
      return out;
    }
    if (method) throw std::runtime_error("forward_lo_experiment: exact enumeration unavailable");
  }
  if ((!method && dist.char_fn_exact()) || method == ProbMethod::fourier_quadrature) {
    out.p = conc_prob_fourier(dist, mu, v);
    return out;
  }
  out.p = conc_prob_mc(dist, mu, v, mc_trials, seed, false);
  return out;
}

WeakSurvey weak_element_survey(const Gap& gap, int k, double l, const std::vector<Complex>& grid, std::uint64_t cap) {
  if (k < 0) throw std::invalid_argument("weak_element_survey: k must be >= 0");
  WeakSurvey out;
  out.base_dispersion = dispersion(gap, cap);
  std::vector<char> weak(grid.size(), 0);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t g = 0; g < grid.size(); ++g) {
    try {
      double d;
      if (k == 0) {
        d = out.base_dispersion;
      } else {
        Gap extended = gap;
        extended.generators.push_back(grid[g]);
        extended.dims.push_back(static_cast<double>(k));
        d = dispersion(extended, cap);
      }
      weak[g] = d < l * out.base_dispersion;
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (weak[g]) out.weak_points.push_back(grid[g]);
  }
  out.net24_size = epsilon_net(out.weak_points, 24.0).size();
  return out;
}

}  // namespace circlaw
