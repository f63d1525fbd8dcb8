#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "circlaw/cmatrix.hpp"
#include "circlaw/distribution.hpp"

namespace circlaw {

/// One sampled matrix together with what is needed to regenerate it.
struct MatrixSample {
  std::size_t n = 0;
  CMatrix entries;
  std::uint64_t seed = 0;
  std::string descriptor;
  std::optional<double> rho;  // set for sparse samples
};

/// Entry (i, j) is drawn from a generator keyed by (seed, value-stream, i, j),
/// so the matrix does not depend on fill order or thread count.
MatrixSample sample_matrix(const AtomDistribution& dist, std::size_t n, std::uint64_t seed);

/// Entry (i, j) = I_{ij} * a_{ij}; the indicator uses its own stream, so the
/// values coincide with sample_matrix for the same seed.
MatrixSample sample_sparse_matrix(const AtomDistribution& dist, std::size_t n, const SparseSpec& sparse,
                                  std::uint64_t seed);

/// Fraction of rows of m that are identically zero.
double zero_row_fraction(const CMatrix& m);

struct MomentGridPoint {
  Complex z;
  Complex w;
};

/// 16 z-moduli x 16 w-moduli, log-spaced in [1e-2, 10]; z angles stay away from the imaginary axis.
std::vector<MomentGridPoint> default_moment_grid();

struct MomentCheckOptions {
  std::size_t mc_samples = 100000;
  double sigmas = 5.0;
  std::uint64_t seed = 0x6d6f6d656e74ULL;
};

struct MomentReport {
  bool upper_ok = false;
  bool lower_ok = false;
  double worst_ratio = 0.0;   // min over grid of lhs * kappa / Re(z)^2
  double second_moment = 0.0;
  double second_moment_stderr = 0.0;
  bool exact = false;
  bool ok() const noexcept { return upper_ok && lower_ok; }
};

/// Checks E|a|^2 <= kappa and E Re(z a - w)^2 I(|a| <= kappa) >= Re(z)^2 / kappa on a grid.
MomentReport check_controlled_moment(const AtomDistribution& dist, double kappa,
                                     const std::vector<MomentGridPoint>& grid,
                                     const MomentCheckOptions& options = {});

struct PhaseRotation {
  double theta = 0.0;
  double kappa = 1.0;
};

/// Rotates the leading direction of the truncated covariance onto the real
/// axis; kappa is the smallest power of two (up to 2^max_log2_kappa) that passes
/// the default grid. Throws DegenerateDistribution for variance below 1e-12.
PhaseRotation find_phase_rotation(const AtomDistribution& dist, int max_log2_kappa = 30,
                                  const MomentCheckOptions& options = {});

/// Law of (a I(|a| < c) - E[a I(|a| < c)]) / sqrt(Var) with c = n^delta.
AtomDistribution truncate_normalize(const AtomDistribution& dist, std::size_t n, double delta);

}  // namespace circlaw
