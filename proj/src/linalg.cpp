#include "circlaw/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace circlaw {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kUlp = kEps * 0.5;
constexpr double kSafeMin = std::numeric_limits<double>::min();

inline double cabs1(Complex z) { return std::abs(z.real()) + std::abs(z.imag()); }

double norm2(const std::vector<Complex>& x) {
  double s = 0.0;
  for (const Complex& z : x) s += std::norm(z);
  return std::sqrt(s);
}

void scale_vector(std::vector<Complex>& x, double f) {
  for (Complex& z : x) z *= f;
}

// Rotation G = [[c, s], [-conj(s), c]] with G [x; y] = [r; 0].
struct Givens {
  double c;
  Complex s;
  Complex r;
};

Givens make_givens(Complex x, Complex y) {
  const double ax = std::abs(x);
  const double ay = std::abs(y);
  if (ay == 0.0) return {1.0, 0.0, x};
  if (ax == 0.0) return {0.0, 1.0, y};
  const double r = std::hypot(ax, ay);
  const Complex ph = x / ax;
  return {ax / r, ph * std::conj(y) / r, ph * r};
}

// Swaps rows and columns i, j of a square matrix.
void symmetric_swap(CMatrix& a, std::size_t i, std::size_t j) {
  if (i == j) return;
  const std::size_t n = a.rows();
  for (std::size_t k = 0; k < n; ++k) std::swap(a(i, k), a(j, k));
  for (std::size_t k = 0; k < n; ++k) std::swap(a(k, i), a(k, j));
}

struct BalanceRange {
  std::size_t low;
  std::size_t high;  // inclusive
};

// Permutes rows/columns with zero off-diagonal parts to the ends (their
// diagonal entries are eigenvalues), then scales the remaining block by
// powers of two to even out row and column norms.
BalanceRange balance(CMatrix& a) {
  const std::size_t n = a.rows();
  std::size_t low = 0;
  std::size_t high = n - 1;
  bool found = true;
  while (found && high > low) {
    found = false;
    for (std::size_t jj = high + 1; jj-- > low;) {
      bool zero = true;
      for (std::size_t k = low; k <= high && zero; ++k) zero = k == jj || a(jj, k) == Complex(0.0, 0.0);
      if (zero) {
        symmetric_swap(a, jj, high);
        if (high == 0) return {0, 0};
        --high;
        found = true;
        break;
      }
    }
  }
  found = true;
  while (found && high > low) {
    found = false;
    for (std::size_t jj = low; jj <= high; ++jj) {
      bool zero = true;
      for (std::size_t k = low; k <= high && zero; ++k) zero = k == jj || a(k, jj) == Complex(0.0, 0.0);
      if (zero) {
        symmetric_swap(a, jj, low);
        ++low;
        found = true;
        break;
      }
    }
  }
  constexpr double radix = 2.0;
  constexpr double sqrdx = radix * radix;
  bool noconv = true;
  for (int sweep = 0; noconv && sweep < 100; ++sweep) {
    noconv = false;
    for (std::size_t i = low; i <= high; ++i) {
      double c = 0.0;
      double r = 0.0;
      for (std::size_t j = low; j <= high; ++j) {
        if (j == i) continue;
        c += cabs1(a(j, i));
        r += cabs1(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c >= g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        noconv = true;
        const double inv = 1.0 / f;
        for (std::size_t j = 0; j < n; ++j) a(i, j) *= inv;
        for (std::size_t j = 0; j < n; ++j) a(j, i) *= f;
      }
    }
  }
  return {low, high};
}

// In-place Householder reduction of rows/cols [lo, hi] to upper Hessenberg form.
void hessenberg(CMatrix& h, std::size_t lo, std::size_t hi) {
  const std::size_t n = h.rows();
  std::vector<Complex> v(n);
  for (std::size_t k = lo; k + 2 <= hi; ++k) {
    double xnorm = 0.0;
    for (std::size_t i = k + 1; i <= hi; ++i) xnorm += std::norm(h(i, k));
    xnorm = std::sqrt(xnorm);
    double tail = 0.0;
    for (std::size_t i = k + 2; i <= hi; ++i) tail += std::norm(h(i, k));
    if (tail == 0.0) continue;
    const Complex x0 = h(k + 1, k);
    const Complex phase = std::abs(x0) == 0.0 ? Complex(1.0, 0.0) : x0 / std::abs(x0);
    const Complex alpha = -phase * xnorm;
    for (std::size_t i = k + 1; i <= hi; ++i) v[i] = h(i, k);
    v[k + 1] -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = k + 1; i <= hi; ++i) vnorm2 += std::norm(v[i]);
    const double tau = 2.0 / vnorm2;
    // Left: H <- (I - tau v v^*) H on rows k+1..hi, all columns from k.
    for (std::size_t j = k; j < n; ++j) {
      Complex dot = 0.0;
      for (std::size_t i = k + 1; i <= hi; ++i) dot += std::conj(v[i]) * h(i, j);
      dot *= tau;
      for (std::size_t i = k + 1; i <= hi; ++i) h(i, j) -= v[i] * dot;
    }
    // Right: H <- H (I - tau v v^*) on columns k+1..hi, rows 0..hi.
    for (std::size_t i = 0; i <= hi; ++i) {
      Complex dot = 0.0;
      for (std::size_t j = k + 1; j <= hi; ++j) dot += h(i, j) * v[j];
      dot *= tau;
      for (std::size_t j = k + 1; j <= hi; ++j) h(i, j) -= dot * std::conj(v[j]);
    }
    h(k + 1, k) = alpha;
    for (std::size_t i = k + 2; i <= hi; ++i) h(i, k) = 0.0;
  }
}

// Ahues-Tisseur style test for a negligible subdiagonal h(k, k-1).
bool negligible_subdiagonal(const CMatrix& h, std::size_t k, std::size_t l, std::size_t hi, double tol) {
  const Complex sub = h(k, k - 1);
  if (cabs1(sub) <= kSafeMin) return true;
  double tst = cabs1(h(k - 1, k - 1)) + cabs1(h(k, k));
  if (tst == 0.0) {
    if (k >= l + 2) tst += std::abs(h(k - 1, k - 2).real());
    if (k + 1 <= hi) tst += std::abs(h(k + 1, k).real());
  }
  if (std::abs(sub.real()) > tol * tst) return false;
  const double ab = std::max(cabs1(sub), cabs1(h(k - 1, k)));
  const double ba = std::min(cabs1(sub), cabs1(h(k - 1, k)));
  const double aa = std::max(cabs1(h(k, k)), cabs1(h(k - 1, k - 1) - h(k, k)));
  const double bb = std::min(cabs1(h(k, k)), cabs1(h(k - 1, k - 1) - h(k, k)));
  const double s = aa + ab;
  return ba * (ab / s) <= std::max(kSafeMin, tol * (bb * (aa / s)));
}

Complex wilkinson_shift(const CMatrix& h, std::size_t hi) {
  Complex t = h(hi, hi);
  const Complex u = std::sqrt(h(hi - 1, hi)) * std::sqrt(h(hi, hi - 1));
  const double su = cabs1(u);
  if (su == 0.0) return t;
  const Complex x = 0.5 * (h(hi - 1, hi - 1) - t);
  const double sx = cabs1(x);
  const double s = std::max(su, sx);
  Complex y = s * std::sqrt((x / s) * (x / s) + (u / s) * (u / s));
  if (sx > 0.0) {
    const Complex xs = x / sx;
    if (xs.real() * y.real() + xs.imag() * y.imag() < 0.0) y = -y;
  }
  const Complex denom = x + y;
  if (denom == Complex(0.0, 0.0)) return t;
  return t - u * (u / denom);
}

}  // namespace

LuFactorization::LuFactorization(const CMatrix& a) : n_(a.rows()), lu_(a), perm_(a.rows()) {
  if (!a.is_square()) throw std::invalid_argument("LU factorization needs a square matrix");
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  const double threshold = static_cast<double>(n_) * kEps * a.max_abs();
  for (std::size_t k = 0; k < n_; ++k) {
    std::size_t p = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t i = k + 1; i < n_; ++i) {
      const double v = std::abs(lu_(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (p != k) {
      for (std::size_t j = 0; j < n_; ++j) std::swap(lu_(k, j), lu_(p, j));
      std::swap(perm_[k], perm_[p]);
      perm_sign_ = -perm_sign_;
    }
    const Complex pivot = lu_(k, k);
    if (std::abs(pivot) < threshold || pivot == Complex(0.0, 0.0)) singular_ = true;
    if (pivot == Complex(0.0, 0.0)) {
      zero_pivot_ = true;
      continue;
    }
    for (std::size_t i = k + 1; i < n_; ++i) {
      const Complex m = lu_(i, k) / pivot;
      lu_(i, k) = m;
      if (m == Complex(0.0, 0.0)) continue;
      for (std::size_t j = k + 1; j < n_; ++j) lu_(i, j) -= m * lu_(k, j);
    }
  }
}

std::vector<Complex> LuFactorization::solve(std::vector<Complex> b) const {
  if (b.size() != n_) throw std::invalid_argument("LU solve: size mismatch");
  std::vector<Complex> x(n_);
  for (std::size_t i = 0; i < n_; ++i) x[i] = b[perm_[i]];
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
  }
  for (std::size_t i = n_; i-- > 0;) {
    for (std::size_t j = i + 1; j < n_; ++j) x[i] -= lu_(i, j) * x[j];
    x[i] /= lu_(i, i);
  }
  return x;
}

std::vector<Complex> LuFactorization::solve_adjoint(std::vector<Complex> b) const {
  // A = P^T L U, so A^* x = b  <=>  U^* L^* (P x) = b.
  if (b.size() != n_) throw std::invalid_argument("LU solve: size mismatch");
  std::vector<Complex> y = std::move(b);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < i; ++j) y[i] -= std::conj(lu_(j, i)) * y[j];
    y[i] /= std::conj(lu_(i, i));
  }
  for (std::size_t i = n_; i-- > 0;) {
    for (std::size_t j = i + 1; j < n_; ++j) y[i] -= std::conj(lu_(j, i)) * y[j];
  }
  std::vector<Complex> x(n_);
  for (std::size_t i = 0; i < n_; ++i) x[perm_[i]] = y[i];
  return x;
}

LogDet LuFactorization::logdet() const {
  LogDet out;
  out.is_singular = singular_;
  out.phase = static_cast<double>(perm_sign_);
  for (std::size_t i = 0; i < n_; ++i) {
    const Complex u = lu_(i, i);
    const double au = std::abs(u);
    if (au == 0.0) {
      out.log_abs_det = -std::numeric_limits<double>::infinity();
      out.phase = 1.0;
      return out;
    }
    out.log_abs_det += std::log(au);
    out.phase *= u / au;
  }
  out.phase /= std::abs(out.phase);
  return out;
}

LogDet lu_logdet(const CMatrix& a) { return LuFactorization(a).logdet(); }

EigenNonConvergence::EigenNonConvergence(std::vector<Complex> converged, std::size_t unconverged,
                                         std::size_t iterations)
    : std::runtime_error("eigenvalues: QR iteration did not converge (" + std::to_string(unconverged) +
                         " eigenvalues left after " + std::to_string(iterations) + " sweeps)"),
      converged_(std::move(converged)),
      unconverged_(unconverged),
      iterations_(iterations) {}

SpectrumResult eigenvalues(const CMatrix& a, double tol, std::size_t max_iter) {
  if (!a.is_square()) throw std::invalid_argument("eigenvalues: matrix must be square");
  if (!(tol > 0.0)) throw std::invalid_argument("eigenvalues: tol must be positive");
  const std::size_t n = a.rows();
  SpectrumResult res;
  if (n == 0) return res;
  if (max_iter == 0) max_iter = 50 * n;
  const double anorm = a.frobenius_norm();
  const double dtol = std::max(tol, kUlp);

  CMatrix h = a;
  const BalanceRange br = balance(h);
  res.eigenvalues.assign(n, 0.0);
  for (std::size_t i = 0; i < br.low; ++i) res.eigenvalues[i] = h(i, i);
  for (std::size_t i = br.high + 1; i < n; ++i) res.eigenvalues[i] = h(i, i);
  hessenberg(h, br.low, br.high);

  std::size_t hi = br.high;
  const std::size_t low = br.low;
  std::size_t its = 0;
  double max_sub = 0.0;
  bool done = false;
  while (!done) {
    if (hi == low) {
      res.eigenvalues[hi] = h(hi, hi);
      done = true;
      break;
    }
    // Find the start of the active unreduced block.
    std::size_t l = low;
    for (std::size_t k = hi; k > low; --k) {
      if (negligible_subdiagonal(h, k, low, hi, dtol)) {
        max_sub = std::max(max_sub, std::abs(h(k, k - 1)));
        h(k, k - 1) = 0.0;
        l = k;
        break;
      }
    }
    if (l == hi) {
      res.eigenvalues[hi] = h(hi, hi);
      --hi;
      its = 0;
      continue;
    }
    if (res.iterations >= max_iter) {
      std::vector<Complex> converged;
      for (std::size_t i = 0; i < n; ++i) {
        if (i < low || i > hi) converged.push_back(res.eigenvalues[i]);
      }
      throw EigenNonConvergence(std::move(converged), hi - low + 1, res.iterations);
    }
    Complex shift;
    if (its > 0 && its % 20 == 10) {
      shift = 0.75 * std::abs(h(l + 1, l).real()) + h(l, l);
    } else if (its > 0 && its % 20 == 0) {
      shift = 0.75 * std::abs(h(hi, hi - 1).real()) + h(hi, hi);
    } else {
      shift = wilkinson_shift(h, hi);
    }
    // One implicit single-shift sweep over rows/columns l..hi.
    for (std::size_t k = l; k < hi; ++k) {
      const Complex x = k == l ? h(l, l) - shift : h(k, k - 1);
      const Complex y = k == l ? h(l + 1, l) : h(k + 1, k - 1);
      const Givens g = make_givens(x, y);
      if (k > l) {
        h(k, k - 1) = g.r;
        h(k + 1, k - 1) = 0.0;
      }
      for (std::size_t j = k; j <= hi; ++j) {
        const Complex p = h(k, j);
        const Complex q = h(k + 1, j);
        h(k, j) = g.c * p + g.s * q;
        h(k + 1, j) = -std::conj(g.s) * p + g.c * q;
      }
      const std::size_t last = std::min(k + 2, hi);
      for (std::size_t i = l; i <= last; ++i) {
        const Complex p = h(i, k);
        const Complex q = h(i, k + 1);
        h(i, k) = p * g.c + q * std::conj(g.s);
        h(i, k + 1) = -p * g.s + q * g.c;
      }
    }
    ++its;
    ++res.iterations;
  }
  res.max_residual = anorm > 0.0 ? max_sub / anorm : 0.0;
  return res;
}

std::vector<double> hermitian_eigenvalues(const CMatrix& a_in) {
  if (!a_in.is_square()) throw std::invalid_argument("hermitian_eigenvalues: matrix must be square");
  const std::size_t n = a_in.rows();
  if (n == 0) return {};
  CMatrix a = a_in;
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = a(i, i).real();
    for (std::size_t j = 0; j < i; ++j) a(i, j) = std::conj(a(j, i));
  }
  std::vector<double> d(n);
  std::vector<double> e(n, 0.0);
  std::vector<Complex> v(n), p(n);
  // Householder tridiagonalization using both triangles of the trailing block.
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double xnorm = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) xnorm += std::norm(a(i, k));
    xnorm = std::sqrt(xnorm);
    double tail = 0.0;
    for (std::size_t i = k + 2; i < n; ++i) tail += std::norm(a(i, k));
    if (tail == 0.0) continue;
    const Complex x0 = a(k + 1, k);
    const Complex phase = std::abs(x0) == 0.0 ? Complex(1.0, 0.0) : x0 / std::abs(x0);
    const Complex alpha = -phase * xnorm;
    for (std::size_t i = k + 1; i < n; ++i) v[i] = a(i, k);
    v[k + 1] -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vnorm2 += std::norm(v[i]);
    const double tau = 2.0 / vnorm2;
    for (std::size_t i = k + 1; i < n; ++i) {
      Complex s = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) s += a(i, j) * v[j];
      p[i] = tau * s;
    }
    Complex vp = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vp += std::conj(v[i]) * p[i];
    const double kk = 0.5 * tau * vp.real();
    for (std::size_t i = k + 1; i < n; ++i) p[i] -= kk * v[i];  // p is now w
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= v[i] * std::conj(p[j]) + p[i] * std::conj(v[j]);
    }
    a(k + 1, k) = alpha;
    a(k, k + 1) = std::conj(alpha);
    for (std::size_t i = k + 2; i < n; ++i) a(i, k) = a(k, i) = 0.0;
  }
  for (std::size_t i = 0; i < n; ++i) d[i] = a(i, i).real();
  for (std::size_t i = 0; i + 1 < n; ++i) e[i] = std::abs(a(i + 1, i));

  // Implicit QL on the real symmetric tridiagonal (d, e), e[i] couples i and i+1.
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= kEps * dd) break;
      }
      if (m != l) {
        if (++iter > 60) throw std::runtime_error("hermitian_eigenvalues: QL iteration did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, pp = 0.0;
        bool early = false;
        for (std::size_t i = m; i-- > l;) {
          const double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= pp;
            e[m] = 0.0;
            early = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - pp;
          r = (d[i] - g) * s + 2.0 * c * b;
          pp = s * r;
          d[i + 1] = g + pp;
          g = c * r - b;
        }
        if (early) continue;
        d[l] -= pp;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  std::sort(d.begin(), d.end());
  return d;
}

SvdSummary singular_values(const CMatrix& a) {
  SvdSummary out;
  if (a.rows() == 0 || a.cols() == 0) {
    out.all_values = std::vector<double>{};
    return out;
  }
  const CMatrix g = a.rows() >= a.cols() ? gram(a) : gram(a.adjoint());
  std::vector<double> ev = hermitian_eigenvalues(g);
  std::vector<double> sv(ev.size());
  for (std::size_t k = 0; k < ev.size(); ++k) sv[ev.size() - 1 - k] = std::sqrt(std::max(0.0, ev[k]));
  out.sigma_max = sv.front();
  out.sigma_min = sv.back();
  out.all_values = std::move(sv);
  return out;
}

NormEstimate spectral_norm(const CMatrix& a, double tol, std::size_t max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("spectral_norm: tol must be positive");
  NormEstimate out;
  const std::size_t n = a.cols();
  if (n == 0 || a.rows() == 0 || a.max_abs() == 0.0) return out;
  const CMatrix ah = a.adjoint();
  // Deterministic start with no special alignment.
  std::vector<Complex> x(n);
  for (std::size_t j = 0; j < n; ++j) x[j] = Complex(1.0 + 0.37 * std::sin(1.3 * j + 0.2), 0.21 * std::cos(0.7 * j));
  scale_vector(x, 1.0 / norm2(x));
  double est = 0.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    const std::vector<Complex> y = a * x;
    const double ny = norm2(y);
    std::vector<Complex> z = ah * y;
    const double nz = norm2(z);
    out.iterations = it;
    if (nz == 0.0) {
      out.value = ny;
      out.achieved_tol = 0.0;
      return out;
    }
    const double next = ny;
    const double change = est > 0.0 ? std::abs(next - est) / next : 1.0;
    est = next;
    out.value = est;
    out.achieved_tol = change;
    if (change < 0.1 * tol) break;
    scale_vector(z, 1.0 / nz);
    x = std::move(z);
  }
  return out;
}

double least_singular_value(const CMatrix& a) {
  if (!a.is_square()) throw std::invalid_argument("least_singular_value: matrix must be square");
  const std::size_t n = a.rows();
  if (n == 0) return 0.0;
  const double from_gram = singular_values(a).sigma_min;
  const LuFactorization lu(a);
  if (lu.is_singular()) return from_gram;
  // Power iteration for ||A^{-1}|| on A^{-*} A^{-1}; 1/||A^{-1} x|| decreases to sigma_min.
  std::vector<Complex> x(n);
  for (std::size_t j = 0; j < n; ++j) x[j] = Complex(1.0 + 0.41 * std::cos(2.1 * j + 0.3), 0.17 * std::sin(1.1 * j));
  scale_vector(x, 1.0 / norm2(x));
  double best = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 500; ++it) {
    std::vector<Complex> y = lu.solve(x);
    const double ny = norm2(y);
    if (!std::isfinite(ny) || ny == 0.0) break;
    const double est = 1.0 / ny;
    const double prev = best;
    best = std::min(best, est);
    std::vector<Complex> z = lu.solve_adjoint(std::move(y));
    const double nz = norm2(z);
    if (!std::isfinite(nz) || nz == 0.0) break;
    scale_vector(z, 1.0 / nz);
    x = std::move(z);
    if (std::isfinite(prev) && prev - est <= 1e-15 * est) break;
  }
  if (!std::isfinite(best)) return from_gram;
  return best;
}

}  // namespace circlaw
