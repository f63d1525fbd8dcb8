#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace circlaw {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule mapped to [a, b].
QuadratureRule gauss_legendre(std::size_t n, double a = -1.0, double b = 1.0);

/// Composite Gauss-Legendre: `panels` equal panels of `per_panel` nodes each.
QuadratureRule composite_gauss_legendre(std::size_t panels, std::size_t per_panel, double a, double b);

/// Integrates f over [a, b] with a composite rule.
double integrate(const std::function<double(double)>& f, double a, double b, std::size_t panels = 16,
                 std::size_t per_panel = 16);

}  // namespace circlaw
