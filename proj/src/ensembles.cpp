#include "circlaw/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "circlaw/kernels.hpp"

namespace circlaw {

namespace {

constexpr double kPi = std::numbers::pi;

// Truncated moments of (x, y) = (Re a, Im a) on the event |a| <= kappa.
struct TruncatedMoments {
  double prob = 0.0;
  double mx = 0.0, my = 0.0;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
};

std::optional<TruncatedMoments> closed_form_moments(const AtomDistribution& dist, double kappa) {
  TruncatedMoments t;
  if (dist.has_exact_enumeration()) {
    for (const Atom& a : dist.support()) {
      if (!(std::abs(a.value) <= kappa)) continue;
      const double x = a.value.real();
      const double y = a.value.imag();
      t.prob += a.prob;
      t.mx += a.prob * x;
      t.my += a.prob * y;
      t.sxx += a.prob * x * x;
      t.sxy += a.prob * x * y;
      t.syy += a.prob * y * y;
    }
    return t;
  }
  switch (dist.kind()) {
    case AtomKind::real_gaussian:
      t.prob = std::erf(kappa / std::numbers::sqrt2);
      t.sxx = t.prob - kappa * std::sqrt(2.0 / kPi) * std::exp(-0.5 * kappa * kappa);
      return t;
    case AtomKind::complex_gaussian: {
      const double e = std::exp(-kappa * kappa);
      t.prob = 1.0 - e;
      t.sxx = t.syy = 0.5 * (1.0 - (1.0 + kappa * kappa) * e);
      return t;
    }
    case AtomKind::rotated: {
      const auto b = closed_form_moments(*dist.base(), kappa);
      if (!b) return std::nullopt;
      const double c = std::cos(dist.theta());
      const double s = std::sin(dist.theta());
      t.prob = b->prob;
      t.mx = c * b->mx - s * b->my;
      t.my = s * b->mx + c * b->my;
      t.sxx = c * c * b->sxx - 2.0 * c * s * b->sxy + s * s * b->syy;
      t.syy = s * s * b->sxx + 2.0 * c * s * b->sxy + c * c * b->syy;
      t.sxy = c * s * (b->sxx - b->syy) + (c * c - s * s) * b->sxy;
      return t;
    }
    case AtomKind::masked: {
      const auto b = closed_form_moments(*dist.base(), kappa);
      if (!b) return std::nullopt;
      const double mu = dist.mu();
      t.prob = (1.0 - mu) + mu * b->prob;
      t.mx = mu * b->mx;
      t.my = mu * b->my;
      t.sxx = mu * b->sxx;
      t.sxy = mu * b->sxy;
      t.syy = mu * b->syy;
      return t;
    }
    default:
      return std::nullopt;
  }
}

std::vector<Complex> draw_samples(const AtomDistribution& dist, const MomentCheckOptions& options) {
  std::vector<Complex> out(options.mc_samples);
  for (std::size_t k = 0; k < out.size(); ++k) {
    CounterRng rng(options.seed, kStreamMoment, k);
    out[k] = dist.sample(rng);
  }
  return out;
}

TruncatedMoments sample_moments(const std::vector<Complex>& samples, double kappa) {
  TruncatedMoments t;
  for (const Complex& a : samples) {
    if (!(std::abs(a) <= kappa)) continue;
    t.prob += 1.0;
    t.mx += a.real();
    t.my += a.imag();
    t.sxx += a.real() * a.real();
    t.sxy += a.real() * a.imag();
    t.syy += a.imag() * a.imag();
  }
  const double inv = 1.0 / static_cast<double>(samples.size());
  t.prob *= inv;
  t.mx *= inv;
  t.my *= inv;
  t.sxx *= inv;
  t.sxy *= inv;
  t.syy *= inv;
  return t;
}

double lhs_from_moments(const TruncatedMoments& t, Complex z, Complex w) {
  const double a = z.real();
  const double b = z.imag();
  const double rw = w.real();
  return a * a * t.sxx - 2.0 * a * b * t.sxy + b * b * t.syy - 2.0 * rw * (a * t.mx - b * t.my) + rw * rw * t.prob;
}

}  // namespace

MatrixSample sample_matrix(const AtomDistribution& dist, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample_matrix: n must be >= 1");
  MatrixSample s;
  s.n = n;
  s.seed = seed;
  s.descriptor = dist.describe();
  s.entries = CMatrix(n, n);
  omp::fill_entries(dist, n, seed, std::nullopt, s.entries.data().data());
  return s;
}

MatrixSample sample_sparse_matrix(const AtomDistribution& dist, std::size_t n, const SparseSpec& sparse,
                                  std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample_sparse_matrix: n must be >= 1");
  MatrixSample s;
  s.n = n;
  s.seed = seed;
  s.rho = sparse.rho(n);
  s.descriptor = dist.describe() + ";alpha=" + format_double(sparse.alpha());
  s.entries = CMatrix(n, n);
  omp::fill_entries(dist, n, seed, s.rho, s.entries.data().data());
  return s;
}

double zero_row_fraction(const CMatrix& m) {
  if (m.rows() == 0) return 0.0;
  std::size_t zero_rows = 0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    bool all_zero = true;
    for (std::size_t j = 0; j < m.cols() && all_zero; ++j) all_zero = m(i, j) == Complex(0.0, 0.0);
    zero_rows += all_zero;
  }
  return static_cast<double>(zero_rows) / static_cast<double>(m.rows());
}

std::vector<MomentGridPoint> default_moment_grid() {
  constexpr int kSide = 16;
  std::vector<MomentGridPoint> grid;
  grid.reserve(kSide * kSide);
  for (int j = 0; j < kSide; ++j) {
    const double rz = std::pow(10.0, -2.0 + 3.0 * j / (kSide - 1));
    // Angles in (-pi/2, pi/2), never on the imaginary axis.
    const double phi = -0.5 * kPi + kPi * (j + 0.5) / kSide;
    const Complex z = std::polar(rz, phi);
    for (int l = 0; l < kSide; ++l) {
      const double rw = std::pow(10.0, -2.0 + 3.0 * l / (kSide - 1));
      grid.push_back({z, std::polar(rw, 2.0 * kPi * (l + 0.5) / kSide)});
    }
  }
  return grid;
}

MomentReport check_controlled_moment(const AtomDistribution& dist, double kappa,
                                     const std::vector<MomentGridPoint>& grid, const MomentCheckOptions& options) {
  if (!(kappa >= 1.0)) throw std::invalid_argument("check_controlled_moment: kappa must be >= 1");
  if (grid.empty()) throw std::invalid_argument("check_controlled_moment: empty grid");
  MomentReport rep;
  rep.worst_ratio = std::numeric_limits<double>::infinity();

  const auto exact = closed_form_moments(dist, kappa);
  const bool second_exact = dist.moments_exact();
  rep.exact = exact.has_value() && second_exact;

  std::vector<Complex> samples;
  if (!exact || !second_exact) samples = draw_samples(dist, options);

  if (second_exact) {
    rep.second_moment = dist.second_moment();
    rep.upper_ok = rep.second_moment <= kappa * (1.0 + 1e-12);
  } else {
    double s = 0.0, s2 = 0.0;
    for (const Complex& a : samples) {
      const double q = std::norm(a);
      s += q;
      s2 += q * q;
    }
    const double m = static_cast<double>(samples.size());
    rep.second_moment = s / m;
    rep.second_moment_stderr = std::sqrt(std::max(0.0, s2 / m - rep.second_moment * rep.second_moment) / m);
    rep.upper_ok = rep.second_moment - options.sigmas * rep.second_moment_stderr <= kappa;
  }

  rep.lower_ok = true;
  for (const MomentGridPoint& g : grid) {
    const double re2 = g.z.real() * g.z.real();
    if (re2 == 0.0) continue;
    const double target = re2 / kappa;
    double lhs = 0.0;
    double se = 0.0;
    if (exact) {
      lhs = lhs_from_moments(*exact, g.z, g.w);
    } else {
      double s = 0.0, s2 = 0.0;
      for (const Complex& a : samples) {
        const double x = std::abs(a) <= kappa ? std::pow((g.z * a - g.w).real(), 2) : 0.0;
        s += x;
        s2 += x * x;
      }
      const double m = static_cast<double>(samples.size());
      lhs = s / m;
      se = std::sqrt(std::max(0.0, s2 / m - lhs * lhs) / m);
    }
    rep.worst_ratio = std::min(rep.worst_ratio, lhs / target);
    const double slack = exact ? 1e-12 * std::max(target, lhs) : options.sigmas * se;
    if (lhs + slack < target) rep.lower_ok = false;
  }
  return rep;
}

PhaseRotation find_phase_rotation(const AtomDistribution& dist, int max_log2_kappa, const MomentCheckOptions& options) {
  if (dist.variance() < 1e-12) throw DegenerateDistribution("find_phase_rotation: variance below 1e-12");
  const std::vector<MomentGridPoint> grid = default_moment_grid();
  std::vector<Complex> samples;
  for (int e = 0; e <= max_log2_kappa; ++e) {
    const double kappa = std::ldexp(1.0, e);
    auto tm = closed_form_moments(dist, kappa);
    if (!tm) {
      if (samples.empty()) samples = draw_samples(dist, options);
      tm = sample_moments(samples, kappa);
    }
    if (tm->prob <= 0.0) continue;
    const double mx = tm->mx / tm->prob;
    const double my = tm->my / tm->prob;
    const double cxx = tm->sxx / tm->prob - mx * mx;
    const double cxy = tm->sxy / tm->prob - mx * my;
    const double cyy = tm->syy / tm->prob - my * my;
    if (cxx + cyy <= 1e-12) continue;
    // Angle of the leading eigenvector of [[cxx, cxy], [cxy, cyy]].
    const double phi = 0.5 * std::atan2(2.0 * cxy, cxx - cyy);
    const double theta = phi == 0.0 ? 0.0 : -phi;
    const AtomDistribution rotated = theta == 0.0 ? dist : AtomDistribution::rotated(dist, theta);
    if (check_controlled_moment(rotated, kappa, grid, options).ok()) return {theta, kappa};
  }
  throw std::runtime_error("find_phase_rotation: no kappa up to 2^" + std::to_string(max_log2_kappa) +
                           " passes the grid check");
}

AtomDistribution truncate_normalize(const AtomDistribution& dist, std::size_t n, double delta) {
  if (n == 0) throw std::invalid_argument("truncate_normalize: n must be >= 1");
  if (!(delta > 0.0 && delta < 0.25)) throw std::invalid_argument("truncate_normalize: delta must lie in (0, 1/4)");
  const double cutoff = std::pow(static_cast<double>(n), delta);
  const AtomDistribution hat = AtomDistribution::truncated(dist, cutoff);
  const double var = hat.variance();
  if (var < 1e-12) throw DegenerateDistribution("truncate_normalize: truncated law has variance below 1e-12");
  return AtomDistribution::normalized(hat, hat.mean(), std::sqrt(var));
}

}  // namespace circlaw
