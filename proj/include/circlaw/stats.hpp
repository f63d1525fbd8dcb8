#pragma once

#include <functional>
#include <vector>

namespace circlaw {

struct MeanStderr {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Sample mean and its standard error (0 for fewer than two values).
MeanStderr mean_stderr(const std::vector<double>& xs);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;  // 1 when y is exactly affine, including constant y
};

/// Ordinary least squares y = intercept + slope x. Needs two distinct x values.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

/// sup_t |F_n(t) - cdf(t)| for the empirical CDF of the samples.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

struct KsTest {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsTest ks_two_sample(std::vector<double> a, std::vector<double> b);

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

}  // namespace circlaw
