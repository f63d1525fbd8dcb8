#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "circlaw/distribution.hpp"
#include "circlaw/ensembles.hpp"
#include "circlaw/stats.hpp"

namespace circlaw {

/// Empirical spectral distribution: equal weights 1/n on the points.
struct Esd {
  std::vector<Complex> points;
};

/// Eigenvalues of N / (sigma sqrt(n)), or N / (sigma sqrt(n rho)) when rho is given.
Esd esd_of_matrix(const MatrixSample& sample, double sigma, std::optional<double> sparse_rho = std::nullopt);

/// Fraction of points with Re <= s and Im <= t.
double cdf(const Esd& esd, double s, double t);

/// Uniform law on the closed unit disk: area of {|z| <= 1, Re z <= s, Im z <= t} / pi.
double uniform_disk_cdf(double s, double t);

struct GridSpec {
  std::vector<double> s_values;
  std::vector<double> t_values;

  /// lo, lo + step, ..., hi on both axes.
  static GridSpec uniform(double lo, double hi, double step);
  /// [-2, 2] with step 0.02.
  static GridSpec standard() { return uniform(-2.0, 2.0, 0.02); }
};

/// Points beyond this count are thinned to order statistics before augmenting the grid.
inline constexpr std::size_t kAugmentLimit = 4096;

/// sup of |mu_n - mu_inf| over the grid augmented with the Re / Im coordinates
/// of the ESD points. Throws on an empty or unsorted grid.
double sup_distance(const Esd& esd, const GridSpec& grid);

/// (1/n) sum exp(i (u Re l + v Im l)).
Complex char_fn_empirical(const Esd& esd, double u, double v);

/// Characteristic function of the uniform disk law (radial Gauss-Legendre x angular trapezoid, 512 x 512).
Complex char_fn_disk(double u, double v);

/// Squared singular values of N / (sigma sqrt(n)) - z I, ascending.
struct NuEsd {
  std::vector<double> xs;
  Complex z;
};

NuEsd nu_esd(const MatrixSample& sample, Complex z, double sigma);

struct LogSplit {
  double upper = 0.0;  // (1/n) sum of log x over x > eps
  double lower = 0.0;  // (1/n) sum of log x over 0 < x <= eps; -inf if some x == 0
  bool lower_is_neg_inf = false;
  std::size_t zero_count = 0;
  double total() const noexcept { return upper + lower; }
};

LogSplit log_integral_split(const NuEsd& nu, double eps_n);

/// n^{-2B}.
double split_threshold(std::size_t n, double b = 3.0);

/// Central difference in s of the full log integral at z = s + i t; NaN if either
/// stencil point has a zero singular value. Throws for h <= 0.
double g_n_fd(const MatrixSample& sample, double s, double t, double h, double sigma);

struct SecondMomentReport {
  double eigen_side = 0.0;  // (1/n) sum |lambda|^2
  double entry_side = 0.0;  // (1/(sigma^2 n^2)) sum |a_jk|^2
  bool holds = false;
};

SecondMomentReport second_moment_report(const MatrixSample& sample, const Esd& esd, double sigma);

/// eigen_side <= entry_side + 1e-9.
bool second_moment_check(const MatrixSample& sample, const Esd& esd, double sigma);

/// Monte Carlo mean of tr((N N^*)^k) for the truncated-normalized ensemble.
MeanStderr trace_moment_estimate(const AtomDistribution& dist, std::size_t n, int k, double delta,
                                 std::size_t trials, std::uint64_t seed);

}  // namespace circlaw
