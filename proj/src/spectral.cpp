#include "circlaw/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "circlaw/kernels.hpp"
#include "circlaw/linalg.hpp"
#include "circlaw/quadrature.hpp"

namespace circlaw {

namespace {

constexpr double kPi = std::numbers::pi;

// Integral of sqrt(1 - x^2) from 0 to x.
double half_chord_integral(double x) {
  x = std::clamp(x, -1.0, 1.0);
  return 0.5 * (x * std::sqrt(1.0 - x * x) + std::asin(x));
}

// Integral over [p, q] of sqrt(1 - x^2), empty when q <= p.
double chord_between(double p, double q) {
  if (q <= p) return 0.0;
  return half_chord_integral(q) - half_chord_integral(p);
}

std::vector<double> thinned(std::vector<double> coords) {
  std::sort(coords.begin(), coords.end());
  if (coords.size() <= kAugmentLimit) return coords;
  std::vector<double> out(kAugmentLimit);
  const double m = static_cast<double>(coords.size() - 1);
  for (std::size_t k = 0; k < kAugmentLimit; ++k) {
    out[k] = coords[static_cast<std::size_t>(std::llround(m * k / (kAugmentLimit - 1)))];
  }
  return out;
}

std::vector<double> merged_axis(const std::vector<double>& grid, std::vector<double> extra) {
  extra.insert(extra.end(), grid.begin(), grid.end());
  std::sort(extra.begin(), extra.end());
  extra.erase(std::unique(extra.begin(), extra.end()), extra.end());
  return extra;
}

void check_grid_axis(const std::vector<double>& g, const char* name) {
  if (g.empty()) throw std::invalid_argument(std::string("sup_distance: empty ") + name + " grid");
  for (std::size_t k = 1; k < g.size(); ++k) {
    if (!(g[k] > g[k - 1])) throw std::invalid_argument(std::string("sup_distance: ") + name + " grid not increasing");
  }
}

struct DiskRule {
  std::vector<double> radii;
  std::vector<double> radial_weights;  // includes the Jacobian r
  std::vector<double> cosines;
  std::vector<double> sines;
};

const DiskRule& disk_rule() {
  static const DiskRule rule = [] {
    constexpr std::size_t kNodes = 512;
    DiskRule r;
    const QuadratureRule gl = gauss_legendre(kNodes, 0.0, 1.0);
    r.radii = gl.nodes;
    r.radial_weights.resize(kNodes);
    for (std::size_t k = 0; k < kNodes; ++k) r.radial_weights[k] = gl.weights[k] * gl.nodes[k];
    r.cosines.resize(kNodes);
    r.sines.resize(kNodes);
    for (std::size_t k = 0; k < kNodes; ++k) {
      const double phi = 2.0 * kPi * static_cast<double>(k) / kNodes;
      r.cosines[k] = std::cos(phi);
      r.sines[k] = std::sin(phi);
    }
    return r;
  }();
  return rule;
}

std::vector<double> shifted_gram_eigenvalues(const CMatrix& n_mat, double scale, Complex z) {
  CMatrix m = scale * n_mat;
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) -= z;
  std::vector<double> xs = hermitian_eigenvalues(gram(m));
  for (double& x : xs) x = std::max(0.0, x);
  return xs;
}

}  // namespace

Esd esd_of_matrix(const MatrixSample& sample, double sigma, std::optional<double> sparse_rho) {
  if (!(sigma > 0.0)) throw std::invalid_argument("esd_of_matrix: sigma must be positive");
  double denom = sigma * std::sqrt(static_cast<double>(sample.n));
  if (sparse_rho) {
    if (!(*sparse_rho > 0.0 && *sparse_rho <= 1.0)) throw std::invalid_argument("esd_of_matrix: rho must be in (0, 1]");
    denom *= std::sqrt(*sparse_rho);
  }
  const SpectrumResult spec = eigenvalues((1.0 / denom) * sample.entries);
  return {spec.eigenvalues};
}

double cdf(const Esd& esd, double s, double t) {
  if (esd.points.empty()) return 0.0;
  std::size_t count = 0;
  for (const Complex& p : esd.points) count += p.real() <= s && p.imag() <= t;
  return static_cast<double>(count) / static_cast<double>(esd.points.size());
}

double uniform_disk_cdf(double s, double t) {
  if (s <= -1.0 || t <= -1.0) return 0.0;
  s = std::min(s, 1.0);
  t = std::min(t, 1.0);
  const double a = std::sqrt(1.0 - t * t);
  double area = 0.0;
  if (t >= 0.0) {
    // Full chord 2c where |x| >= a, chord cut at t (t + c) where |x| < a.
    area += 2.0 * chord_between(-1.0, std::min(s, -a));
    area += 2.0 * chord_between(a, s);
    const double lo = -a;
    const double hi = std::min(s, a);
    if (hi > lo) area += t * (hi - lo) + chord_between(lo, hi);
  } else {
    const double lo = -a;
    const double hi = std::min(s, a);
    if (hi > lo) area += t * (hi - lo) + chord_between(lo, hi);
  }
  return std::clamp(area / kPi, 0.0, 1.0);
}

GridSpec GridSpec::uniform(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw std::invalid_argument("GridSpec::uniform: need step > 0 and hi >= lo");
  GridSpec g;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::size_t k = 0; k < count; ++k) g.s_values.push_back(lo + step * static_cast<double>(k));
  g.t_values = g.s_values;
  return g;
}

double sup_distance(const Esd& esd, const GridSpec& grid) {
  check_grid_axis(grid.s_values, "s");
  check_grid_axis(grid.t_values, "t");
  std::vector<double> re, im;
  re.reserve(esd.points.size());
  im.reserve(esd.points.size());
  for (const Complex& p : esd.points) {
    re.push_back(p.real());
    im.push_back(p.imag());
  }
  const std::vector<double> s_axis = merged_axis(grid.s_values, thinned(std::move(re)));
  const std::vector<double> t_axis = merged_axis(grid.t_values, thinned(std::move(im)));
  return omp::ecdf_sup_distance(esd.points, s_axis, t_axis, uniform_disk_cdf);
}

Complex char_fn_empirical(const Esd& esd, double u, double v) {
  if (esd.points.empty()) return 0.0;
  Complex s = 0.0;
  for (const Complex& p : esd.points) s += std::polar(1.0, u * p.real() + v * p.imag());
  return s / static_cast<double>(esd.points.size());
}

Complex char_fn_disk(double u, double v) {
  const DiskRule& rule = disk_rule();
  const double na = static_cast<double>(rule.cosines.size());
  Complex total = 0.0;
  for (std::size_t i = 0; i < rule.radii.size(); ++i) {
    const double r = rule.radii[i];
    Complex ring = 0.0;
    for (std::size_t j = 0; j < rule.cosines.size(); ++j) {
      ring += std::polar(1.0, r * (u * rule.cosines[j] + v * rule.sines[j]));
    }
    total += rule.radial_weights[i] * ring;
  }
  // (1/pi) * (2 pi / na) * sum.
  return total * (2.0 / na);
}

NuEsd nu_esd(const MatrixSample& sample, Complex z, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("nu_esd: sigma must be positive");
  const double scale = 1.0 / (sigma * std::sqrt(static_cast<double>(sample.n)));
  return {shifted_gram_eigenvalues(sample.entries, scale, z), z};
}

LogSplit log_integral_split(const NuEsd& nu, double eps_n) {
  if (!(eps_n > 0.0)) throw std::invalid_argument("log_integral_split: eps_n must be positive");
  LogSplit out;
  if (nu.xs.empty()) return out;
  const double inv = 1.0 / static_cast<double>(nu.xs.size());
  for (double x : nu.xs) {
    if (x == 0.0) {
      ++out.zero_count;
    } else if (x > eps_n) {
      out.upper += std::log(x) * inv;
    } else {
      out.lower += std::log(x) * inv;
    }
  }
  if (out.zero_count > 0) {
    out.lower_is_neg_inf = true;
    out.lower = -std::numeric_limits<double>::infinity();
  }
  return out;
}

double split_threshold(std::size_t n, double b) { return std::pow(static_cast<double>(n), -2.0 * b); }

double g_n_fd(const MatrixSample& sample, double s, double t, double h, double sigma) {
  if (!(h > 0.0)) throw std::invalid_argument("g_n_fd: h must be positive");
  const double eps = split_threshold(sample.n);
  const LogSplit plus = log_integral_split(nu_esd(sample, Complex(s + h, t), sigma), eps);
  const LogSplit minus = log_integral_split(nu_esd(sample, Complex(s - h, t), sigma), eps);
  if (plus.lower_is_neg_inf || minus.lower_is_neg_inf) return std::numeric_limits<double>::quiet_NaN();
  return (plus.total() - minus.total()) / (2.0 * h);
}

SecondMomentReport second_moment_report(const MatrixSample& sample, const Esd& esd, double sigma) {
  SecondMomentReport rep;
  const double n = static_cast<double>(sample.n);
  for (const Complex& l : esd.points) rep.eigen_side += std::norm(l);
  rep.eigen_side /= n;
  rep.entry_side = std::pow(sample.entries.frobenius_norm(), 2) / (sigma * sigma * n * n);
  rep.holds = rep.eigen_side <= rep.entry_side + 1e-9;
  return rep;
}

bool second_moment_check(const MatrixSample& sample, const Esd& esd, double sigma) {
  return second_moment_report(sample, esd, sigma).holds;
}

MeanStderr trace_moment_estimate(const AtomDistribution& dist, std::size_t n, int k, double delta,
                                 std::size_t trials, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("trace_moment_estimate: k must be >= 1");
  if (trials < 1) throw std::invalid_argument("trace_moment_estimate: trials must be >= 1");
  const AtomDistribution tilde = truncate_normalize(dist, n, delta);
  double s = 0.0, s2 = 0.0;
  for (std::size_t tr = 0; tr < trials; ++tr) {
    const MatrixSample m = sample_matrix(tilde, n, mix(seed, fnv1a64("trace_moment"), n, tr));
    const std::vector<double> ev = hermitian_eigenvalues(gram(m.entries.adjoint()));
    double trace = 0.0;
    for (double x : ev) trace += std::pow(std::max(0.0, x), k);
    s += trace;
    s2 += trace * trace;
  }
  const double m = static_cast<double>(trials);
  MeanStderr out;
  out.mean = s / m;
  out.std_error = trials > 1 ? std::sqrt(std::max(0.0, (s2 - m * out.mean * out.mean) / (m - 1.0)) / m) : 0.0;
  return out;
}

}  // namespace circlaw
