#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "circlaw/common.hpp"
#include "circlaw/rng.hpp"

namespace circlaw {

enum class AtomKind {
  bernoulli,         // +-1 with probability 1/2
  real_gaussian,     // N(0, 1)
  complex_gaussian,  // independent Re, Im ~ N(0, 1/2), so E|a|^2 = 1
  discrete,          // finite table of complex values
  truncated,         // a * I(|a| < cutoff)
  normalized,        // (a - shift) / scale
  rotated,           // e^{i theta} a
  masked,            // a * I_mu, I_mu ~ Bernoulli(mu) independent of a
};

struct Atom {
  Complex value;
  double prob;
};

/// The scalar law of a matrix entry or walk step. Composite kinds hold their
/// base law by shared pointer, so copies are cheap and immutable.
class AtomDistribution {
 public:
  static AtomDistribution bernoulli();
  static AtomDistribution real_gaussian();
  static AtomDistribution complex_gaussian();
  /// Throws std::invalid_argument unless probs are nonnegative and sum to 1 within 1e-12.
  static AtomDistribution discrete(std::vector<Complex> values, std::vector<double> probs);
  static AtomDistribution point_mass(Complex value);
  static AtomDistribution truncated(const AtomDistribution& base, double cutoff);
  static AtomDistribution normalized(const AtomDistribution& base, Complex shift, double scale);
  static AtomDistribution rotated(const AtomDistribution& base, double theta);
  static AtomDistribution masked(const AtomDistribution& base, double mu);

  AtomKind kind() const noexcept { return kind_; }
  const AtomDistribution* base() const noexcept { return base_.get(); }
  double cutoff() const noexcept { return cutoff_; }
  Complex shift() const noexcept { return shift_; }
  double scale() const noexcept { return scale_; }
  double theta() const noexcept { return theta_; }
  double mu() const noexcept { return mu_; }

  Complex mean() const;
  /// E|a|^2.
  double second_moment() const;
  /// E|a - E a|^2.
  double variance() const;
  /// True when mean/second_moment are exact (closed form or finite enumeration).
  bool moments_exact() const;

  bool has_exact_enumeration() const noexcept;
  /// Finite support with merged duplicate values; throws std::logic_error if
  /// the law is not enumerable.
  std::vector<Atom> support() const;

  Complex sample(CounterRng& rng) const;

  /// phi(z) = E e(Re(a z)) with e(t) = exp(2 pi i t). Exact for enumerable and
  /// Gaussian-based laws; deterministic Monte Carlo (fixed seed) otherwise.
  Complex char_fn(Complex z) const;
  bool char_fn_exact() const;

  /// True for laws symmetric under a -> -a (used to enable exact shortcuts).
  bool is_symmetric() const;

  /// Textual descriptor, e.g. "truncated(bernoulli,2)".
  std::string describe() const;

 private:
  struct Moments {
    Complex mean;
    double second;
    bool exact;
  };
  Moments moments() const;

  AtomKind kind_ = AtomKind::bernoulli;
  std::vector<Atom> atoms_;
  std::shared_ptr<const AtomDistribution> base_;
  double cutoff_ = 0.0;
  Complex shift_{};
  double scale_ = 1.0;
  double theta_ = 0.0;
  double mu_ = 1.0;
};

/// Law of a1 - a2 for iid copies (enumerable laws only), duplicates merged.
std::vector<Atom> difference_law(const AtomDistribution& dist);

/// Inverse of AtomDistribution::describe(). Also accepts point_mass(z).
/// Throws std::invalid_argument on malformed text.
AtomDistribution parse_distribution(std::string_view text);

/// Merges atoms whose values agree on a lattice of spacing 1e-12 * max(1, max |value|)
/// and drops zero-probability entries. Output is sorted by (re, im).
std::vector<Atom> merge_atoms(std::vector<Atom> atoms);

/// Sparsity profile rho(n) = n^{-1 + alpha}.
class SparseSpec {
 public:
  /// alpha in [0, 1]; alpha = 0 is the degenerate rho = 1/n regime.
  explicit SparseSpec(double alpha);
  double alpha() const noexcept { return alpha_; }
  double rho(std::size_t n) const;

 private:
  double alpha_;
};

}  // namespace circlaw
