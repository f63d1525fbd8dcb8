#include "circlaw/lsv.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>

#include "circlaw/ensembles.hpp"
#include "circlaw/linalg.hpp"
#include "circlaw/rng.hpp"

namespace circlaw {

namespace {

using i128 = __int128;

struct GaussInt {
  i128 re = 0;
  i128 im = 0;
  bool zero() const { return re == 0 && im == 0; }
};

constexpr i128 kSafeMagnitude = static_cast<i128>(1) << 60;

GaussInt mul(GaussInt a, GaussInt b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
GaussInt sub(GaussInt a, GaussInt b) { return {a.re - b.re, a.im - b.im}; }

// a / b where the quotient is known to be a Gaussian integer.
GaussInt exact_div(GaussInt a, GaussInt b) {
  const i128 den = b.re * b.re + b.im * b.im;
  const GaussInt num = mul(a, {b.re, -b.im});
  return {num.re / den, num.im / den};
}

void check_range(GaussInt a) {
  const auto mag = [](i128 x) { return x < 0 ? -x : x; };
  if (mag(a.re) > kSafeMagnitude || mag(a.im) > kSafeMagnitude) {
    throw std::overflow_error("gaussian_integer_singular: intermediate value out of range");
  }
}

bool bareiss_singular(std::vector<GaussInt> a, std::size_t n) {
  GaussInt prev{1, 0};
  for (std::size_t k = 0; k < n; ++k) {
    if (a[k * n + k].zero()) {
      std::size_t p = k + 1;
      while (p < n && a[p * n + k].zero()) ++p;
      if (p == n) return true;
      for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[p * n + j]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        const GaussInt t = sub(mul(a[k * n + k], a[i * n + j]), mul(a[i * n + k], a[k * n + j]));
        check_range(t);
        a[i * n + j] = exact_div(t, prev);
      }
      a[i * n + k] = {0, 0};
    }
    prev = a[k * n + k];
  }
  return a[(n - 1) * n + (n - 1)].zero();
}

bool near_integer(double x) { return std::abs(x - std::nearbyint(x)) <= 1e-12 * std::max(1.0, std::abs(x)); }

std::uint64_t trial_seed(std::uint64_t seed, std::size_t n, std::size_t trial) { return mix(seed, n, trial); }

double vec_norm(const std::vector<Complex>& v) {
  double s = 0.0;
  for (const Complex& z : v) s += std::norm(z);
  return std::sqrt(s);
}

void project_out(const std::vector<std::vector<Complex>>& basis, std::vector<Complex>& w) {
  // Two passes of modified Gram-Schmidt keep the residual orthogonal in floating point.
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& q : basis) {
      Complex c = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) c += std::conj(q[i]) * w[i];
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= c * q[i];
    }
  }
}

std::vector<Complex> row_of(const CMatrix& m, std::size_t i) {
  return std::vector<Complex>(m.data().begin() + static_cast<std::ptrdiff_t>(i * m.cols()),
                              m.data().begin() + static_cast<std::ptrdiff_t>((i + 1) * m.cols()));
}

}  // namespace

ShiftSpec ShiftSpec::custom(CMatrix m) {
  if (!m.is_square()) throw std::invalid_argument("ShiftSpec::custom: matrix must be square");
  if (!m.all_finite()) throw std::invalid_argument("ShiftSpec::custom: matrix must be finite");
  return ShiftSpec(Kind::custom, 0.0, std::move(m));
}

CMatrix ShiftSpec::build(std::size_t n) const {
  switch (kind_) {
    case Kind::zero:
      return CMatrix(n, n);
    case Kind::scalar: {
      CMatrix m(n, n);
      for (std::size_t i = 0; i < n; ++i) m(i, i) = z_;
      return m;
    }
    case Kind::custom:
      if (m_.rows() != n) throw std::invalid_argument("ShiftSpec: custom matrix has the wrong size");
      return m_;
  }
  return CMatrix(n, n);
}

std::string ShiftSpec::describe() const {
  switch (kind_) {
    case Kind::zero:
      return "zero";
    case Kind::scalar:
      return "scalar(" + format_complex(z_) + ")";
    case Kind::custom:
      return "custom(" + std::to_string(m_.rows()) + ")";
  }
  return "zero";
}

double LsvSample::condition() const {
  if (singular || !(sigma_min > 0.0)) return std::numeric_limits<double>::infinity();
  return sigma_max / sigma_min;
}

std::string to_string(TailStatistic s) { return s == TailStatistic::condition ? "condition" : "sigma_min"; }

std::vector<LsvSample> lsv_samples(const AtomDistribution& dist, std::size_t n, const ShiftSpec& shift,
                                   std::size_t trials, std::uint64_t seed, const std::optional<SparseSpec>& sparse) {
  if (n < 1) throw std::invalid_argument("lsv_samples: n must be >= 1");
  if (trials < 1) throw std::invalid_argument("lsv_samples: trials must be >= 1");
  const CMatrix m = shift.build(n);
  std::vector<LsvSample> out(trials);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t t = 0; t < trials; ++t) {
    LsvSample& s = out[t];
    s.seed = trial_seed(seed, n, t);
    try {
      MatrixSample ms = sparse ? sample_sparse_matrix(dist, n, *sparse, s.seed) : sample_matrix(dist, n, s.seed);
      CMatrix a = ms.entries + m;
      if (!a.all_finite()) throw std::domain_error("lsv_samples: non-finite matrix");
      s.singular = LuFactorization(a).has_zero_pivot();
      s.sigma_max = spectral_norm(a).value;
      s.sigma_min = s.singular ? 0.0 : least_singular_value(a);
    } catch (const std::exception& e) {
      s.failed = true;
      s.error = e.what();
    }
  }
  return out;
}

LsvTailResult tail_from_samples(const std::vector<LsvSample>& samples, std::size_t n, double B,
                                TailStatistic statistic) {
  LsvTailResult r;
  r.n = n;
  r.B = B;
  r.statistic = statistic;
  const double nb = std::pow(static_cast<double>(n), B);
  for (const LsvSample& s : samples) {
    if (s.failed) {
      ++r.failures;
      continue;
    }
    ++r.trials;
    const bool hit = statistic == TailStatistic::sigma_min ? (s.singular || s.sigma_min <= 1.0 / nb)
                                                           : (s.condition() >= nb);
    if (hit) ++r.hits;
  }
  if (r.trials > 0) {
    const double t = static_cast<double>(r.trials);
    r.rate = static_cast<double>(r.hits) / t;
    r.std_error = std::sqrt(r.rate * (1.0 - r.rate) / t);
  }
  return r;
}

std::vector<LsvTailResult> lsv_tail_sweep(const AtomDistribution& dist, std::size_t n, const ShiftSpec& shift,
                                          const std::vector<double>& Bs, std::size_t trials, std::uint64_t seed,
                                          const std::optional<SparseSpec>& sparse) {
  const auto samples = lsv_samples(dist, n, shift, trials, seed, sparse);
  std::vector<LsvTailResult> out;
  for (double B : Bs) {
    LsvTailResult r = tail_from_samples(samples, n, B, TailStatistic::sigma_min);
    r.ensemble = dist.describe();
    r.shift = shift.describe();
    out.push_back(std::move(r));
  }
  return out;
}

LsvTailResult lsv_tail(const AtomDistribution& dist, std::size_t n, const ShiftSpec& shift, double B,
                       std::size_t trials, std::uint64_t seed, const std::optional<SparseSpec>& sparse) {
  return lsv_tail_sweep(dist, n, shift, {B}, trials, seed, sparse).front();
}

LsvTailResult condition_number_experiment(const AtomDistribution& dist, std::size_t n, const ShiftSpec& shift,
                                          double B, std::size_t trials, std::uint64_t seed,
                                          const std::optional<SparseSpec>& sparse) {
  const auto samples = lsv_samples(dist, n, shift, trials, seed, sparse);
  LsvTailResult r = tail_from_samples(samples, n, B, TailStatistic::condition);
  r.ensemble = dist.describe();
  r.shift = shift.describe();
  return r;
}

bool gaussian_integer_singular(const std::vector<std::int64_t>& re, const std::vector<std::int64_t>& im,
                               std::size_t n) {
  if (n == 0 || re.size() != n * n || im.size() != n * n) {
    throw std::invalid_argument("gaussian_integer_singular: expected n*n entries");
  }
  std::vector<GaussInt> a(n * n);
  for (std::size_t k = 0; k < n * n; ++k) {
    a[k] = {re[k], im[k]};
    check_range(a[k]);
  }
  return bareiss_singular(std::move(a), n);
}

std::optional<double> singularity_prob_exact(const AtomDistribution& dist, std::size_t n) {
  if (n < 1) throw std::invalid_argument("singularity_prob: n must be >= 1");
  if (!dist.has_exact_enumeration()) return std::nullopt;
  const std::vector<Atom> atoms = dist.support();
  const std::size_t m = atoms.size();
  const std::size_t cells = n * n;
  if (static_cast<double>(cells) * std::log(static_cast<double>(m)) > std::log(kSingularityEnumerationCap)) {
    return std::nullopt;
  }
  std::uint64_t total = 1;
  for (std::size_t c = 0; c < cells; ++c) total *= m;

  bool integral = true;
  for (const Atom& a : atoms) integral = integral && near_integer(a.value.real()) && near_integer(a.value.imag());
  std::vector<GaussInt> ints(m);
  for (std::size_t k = 0; k < m; ++k) {
    ints[k] = {static_cast<i128>(std::llround(atoms[k].value.real())),
               static_cast<i128>(std::llround(atoms[k].value.imag()))};
  }

  constexpr std::uint64_t kBlock = 4096;
  const std::uint64_t blocks = (total + kBlock - 1) / kBlock;
  std::vector<double> partial(blocks, 0.0);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::uint64_t b = 0; b < blocks; ++b) {
    try {
      std::vector<std::size_t> digit(cells);
      std::uint64_t idx = b * kBlock;
      for (std::size_t c = 0; c < cells; ++c) {
        digit[c] = idx % m;
        idx /= m;
      }
      std::vector<GaussInt> gi(cells);
      CMatrix fm(n, n);
      double acc = 0.0;
      const std::uint64_t end = std::min(total, (b + 1) * kBlock);
      for (std::uint64_t k = b * kBlock; k < end; ++k) {
        double prob = 1.0;
        for (std::size_t c = 0; c < cells; ++c) prob *= atoms[digit[c]].prob;
        bool singular;
        if (integral) {
          for (std::size_t c = 0; c < cells; ++c) gi[c] = ints[digit[c]];
          singular = bareiss_singular(gi, n);
        } else {
          for (std::size_t c = 0; c < cells; ++c) fm.data()[c] = atoms[digit[c]].value;
          singular = LuFactorization(fm).is_singular();
        }
        if (singular) acc += prob;
        for (std::size_t c = 0; c < cells; ++c) {
          if (++digit[c] < m) break;
          digit[c] = 0;
        }
      }
      partial[b] = acc;
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  double sum = 0.0;
  for (double p : partial) sum += p;
  return sum;
}

ProbEstimate singularity_prob_mc(const AtomDistribution& dist, std::size_t n, std::size_t trials,
                                 std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("singularity_prob: n must be >= 1");
  if (trials < 1) throw std::invalid_argument("singularity_prob: trials must be >= 1");
  std::vector<char> hit(trials, 0);
#pragma omp parallel for schedule(static)
  for (std::size_t t = 0; t < trials; ++t) {
    const MatrixSample s = sample_matrix(dist, n, trial_seed(seed, n, t));
    hit[t] = LuFactorization(s.entries).is_singular() ? 1 : 0;
  }
  std::size_t count = 0;
  for (char h : hit) count += static_cast<std::size_t>(h);
  ProbEstimate est;
  est.method = ProbMethod::monte_carlo;
  est.value = static_cast<double>(count) / static_cast<double>(trials);
  est.std_error = std::sqrt(est.value * (1.0 - est.value) / static_cast<double>(trials));
  return est;
}

ProbEstimate singularity_prob(const AtomDistribution& dist, std::size_t n, std::size_t trials, std::uint64_t seed) {
  if (const auto p = singularity_prob_exact(dist, n)) return {*p, 0.0, ProbMethod::exact_enumeration};
  return singularity_prob_mc(dist, n, trials, seed);
}

double distance_to_span(const std::vector<std::vector<Complex>>& rows, const std::vector<Complex>& x) {
  std::vector<std::vector<Complex>> basis;
  for (const auto& r : rows) {
    if (r.size() != x.size()) throw std::invalid_argument("distance_to_span: dimension mismatch");
    std::vector<Complex> w = r;
    project_out(basis, w);
    const double nw = vec_norm(w);
    // Rows that are numerically dependent on the earlier ones add nothing.
    if (nw > 1e-10 * std::max(vec_norm(r), std::numeric_limits<double>::min())) {
      for (Complex& z : w) z /= nw;
      basis.push_back(std::move(w));
    }
  }
  std::vector<Complex> w = x;
  project_out(basis, w);
  return vec_norm(w);
}

std::vector<double> row_distance_experiment(const AtomDistribution& dist, std::size_t n, std::size_t trials,
                                            std::uint64_t seed, RowSetup setup) {
  if (n < 2) throw std::invalid_argument("row_distance_experiment: n must be >= 2");
  std::vector<std::vector<Complex>> fixed_rows;
  if (setup == RowSetup::fixed) {
    const MatrixSample base = sample_matrix(dist, n, mix(seed, fnv1a64("fixed-rows"), n));
    for (std::size_t i = 0; i + 1 < n; ++i) fixed_rows.push_back(row_of(base.entries, i));
  }
  std::vector<double> out(trials);
#pragma omp parallel for schedule(static)
  for (std::size_t t = 0; t < trials; ++t) {
    const MatrixSample s = sample_matrix(dist, n, trial_seed(seed, n, t));
    if (setup == RowSetup::fixed) {
      out[t] = distance_to_span(fixed_rows, row_of(s.entries, n - 1));
    } else {
      std::vector<std::vector<Complex>> rows;
      for (std::size_t i = 0; i + 1 < n; ++i) rows.push_back(row_of(s.entries, i));
      out[t] = distance_to_span(rows, row_of(s.entries, n - 1));
    }
  }
  return out;
}

std::vector<double> hyperplane_distance_samples(const AtomDistribution& dist, const std::vector<Complex>& normal,
                                                std::size_t trials, std::uint64_t seed) {
  if (normal.empty() || std::abs(vec_norm(normal) - 1.0) > 1e-9) {
    throw std::invalid_argument("hyperplane_distance_samples: normal must be a unit vector");
  }
  std::vector<double> out(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    Complex dot = 0.0;
    for (std::size_t j = 0; j < normal.size(); ++j) {
      CounterRng rng(seed, kStreamValue, t, j);
      dot += std::conj(normal[j]) * dist.sample(rng);
    }
    out[t] = std::abs(dot);
  }
  return out;
}

double half_normal_cdf(double t) { return t <= 0.0 ? 0.0 : std::erf(t / std::sqrt(2.0)); }

double complex_gaussian_distance_cdf(double t) { return t <= 0.0 ? 0.0 : -std::expm1(-t * t); }

}  // namespace circlaw
