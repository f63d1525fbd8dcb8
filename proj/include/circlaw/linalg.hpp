#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "circlaw/cmatrix.hpp"

namespace circlaw {

struct LogDet {
  double log_abs_det = 0.0;  // -inf when a pivot is exactly zero
  Complex phase{1.0, 0.0};
  bool is_singular = false;
};

/// Partial-pivoted LU. Singular when some |u_ii| < n * eps * max|a_ij|.
LogDet lu_logdet(const CMatrix& a);

/// Packed LU factors with row permutation; solves A x = b and A^* x = b.
class LuFactorization {
 public:
  explicit LuFactorization(const CMatrix& a);
  bool is_singular() const noexcept { return singular_; }
  bool has_zero_pivot() const noexcept { return zero_pivot_; }
  std::vector<Complex> solve(std::vector<Complex> b) const;
  std::vector<Complex> solve_adjoint(std::vector<Complex> b) const;
  LogDet logdet() const;

 private:
  std::size_t n_;
  CMatrix lu_;
  std::vector<std::size_t> perm_;  // row i of U came from row perm_[i] of A
  int perm_sign_ = 1;
  bool singular_ = false;
  bool zero_pivot_ = false;
};

struct SpectrumResult {
  std::vector<Complex> eigenvalues;
  double max_residual = 0.0;  // largest deflated subdiagonal relative to ||A||_F
  std::size_t iterations = 0;
};

/// Thrown when the QR iteration exhausts max_iter; keeps what was deflated.
class EigenNonConvergence : public std::runtime_error {
 public:
  EigenNonConvergence(std::vector<Complex> converged, std::size_t unconverged, std::size_t iterations);
  const std::vector<Complex>& converged() const noexcept { return converged_; }
  std::size_t unconverged() const noexcept { return unconverged_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::vector<Complex> converged_;
  std::size_t unconverged_;
  std::size_t iterations_;
};

/// Balancing, Householder Hessenberg reduction, then single-shift complex QR
/// with Wilkinson shifts and exceptional shifts every 10 stalled sweeps.
/// max_iter = 0 means 50 * n sweeps in total.
SpectrumResult eigenvalues(const CMatrix& a, double tol = 1e-10, std::size_t max_iter = 0);

/// Eigenvalues of a Hermitian matrix, ascending (only the upper triangle is read).
std::vector<double> hermitian_eigenvalues(const CMatrix& a);

struct SvdSummary {
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  std::optional<std::vector<double>> all_values;  // descending
};

/// Square roots of the eigenvalues of A^*A (or AA^* when wide), clamped at 0.
SvdSummary singular_values(const CMatrix& a);

struct NormEstimate {
  double value = 0.0;
  double achieved_tol = 0.0;  // last relative change of the estimate
  std::size_t iterations = 0;
};

/// Power iteration on A^*A.
NormEstimate spectral_norm(const CMatrix& a, double tol = 1e-10, std::size_t max_iter = 10000);

/// sigma_min of a square matrix: the A^*A estimate refined by inverse iteration
/// through the LU factors. For LU-singular input the A^*A value is returned.
double least_singular_value(const CMatrix& a);

}  // namespace circlaw
