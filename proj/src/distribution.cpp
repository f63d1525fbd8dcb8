#include "circlaw/distribution.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <map>
#include <numbers>
#include <sstream>

#include "circlaw/quadrature.hpp"

namespace circlaw {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kMonteCarloDraws = 1 << 17;
constexpr std::uint64_t kInternalSeed = 0x5eed0fc1ac1a3ULL;

Complex e_char(double t) { return std::polar(1.0, 2.0 * kPi * t); }

// E |a|^2 I(|a| < c) for the complex Gaussian with E|a|^2 = 1 (|a|^2 ~ Exp(1)).
double cgauss_trunc_second(double c) { return 1.0 - (1.0 + c * c) * std::exp(-c * c); }
// E a^2 I(|a| < c) for a ~ N(0, 1).
double rgauss_trunc_second(double c) {
  return std::erf(c / std::numbers::sqrt2) - c * std::sqrt(2.0 / kPi) * std::exp(-0.5 * c * c);
}

}  // namespace

std::vector<Atom> merge_atoms(std::vector<Atom> atoms) {
  std::map<std::pair<long long, long long>, Atom> merged;
  double magnitude = 1.0;
  for (const Atom& a : atoms) magnitude = std::max(magnitude, std::abs(a.value));
  const double scale = magnitude * 1e-12;
  for (const Atom& a : atoms) {
    if (a.prob <= 0.0) continue;
    const auto key = std::make_pair(std::llround(a.value.real() / scale), std::llround(a.value.imag() / scale));
    auto [it, inserted] = merged.try_emplace(key, a);
    if (!inserted) it->second.prob += a.prob;
  }
  std::vector<Atom> out;
  out.reserve(merged.size());
  for (auto& [key, atom] : merged) out.push_back(atom);
  std::sort(out.begin(), out.end(), [](const Atom& x, const Atom& y) {
    if (x.value.real() != y.value.real()) return x.value.real() < y.value.real();
    return x.value.imag() < y.value.imag();
  });
  return out;
}

AtomDistribution AtomDistribution::bernoulli() {
  AtomDistribution d;
  d.kind_ = AtomKind::bernoulli;
  return d;
}

AtomDistribution AtomDistribution::real_gaussian() {
  AtomDistribution d;
  d.kind_ = AtomKind::real_gaussian;
  return d;
}

AtomDistribution AtomDistribution::complex_gaussian() {
  AtomDistribution d;
  d.kind_ = AtomKind::complex_gaussian;
  return d;
}

AtomDistribution AtomDistribution::discrete(std::vector<Complex> values, std::vector<double> probs) {
  if (values.empty() || values.size() != probs.size()) {
    throw std::invalid_argument("discrete distribution needs matching nonempty values and probs");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!(probs[k] >= 0.0) || !std::isfinite(values[k].real()) || !std::isfinite(values[k].imag())) {
      throw std::invalid_argument("discrete distribution: probabilities must be >= 0 and values finite");
    }
    total += probs[k];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("discrete distribution: probabilities sum to " + format_double(total) + ", not 1");
  }
  AtomDistribution d;
  d.kind_ = AtomKind::discrete;
  std::vector<Atom> atoms;
  for (std::size_t k = 0; k < values.size(); ++k) atoms.push_back({values[k], probs[k]});
  d.atoms_ = merge_atoms(std::move(atoms));
  return d;
}

AtomDistribution AtomDistribution::point_mass(Complex value) { return discrete({value}, {1.0}); }

AtomDistribution AtomDistribution::truncated(const AtomDistribution& base, double cutoff) {
  if (!(cutoff > 0.0)) throw std::invalid_argument("truncation cutoff must be positive");
  AtomDistribution d;
  d.kind_ = AtomKind::truncated;
  d.base_ = std::make_shared<const AtomDistribution>(base);
  d.cutoff_ = cutoff;
  return d;
}

AtomDistribution AtomDistribution::normalized(const AtomDistribution& base, Complex shift, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("normalization scale must be positive");
  AtomDistribution d;
  d.kind_ = AtomKind::normalized;
  d.base_ = std::make_shared<const AtomDistribution>(base);
  d.shift_ = shift;
  d.scale_ = scale;
  return d;
}

AtomDistribution AtomDistribution::rotated(const AtomDistribution& base, double theta) {
  AtomDistribution d;
  d.kind_ = AtomKind::rotated;
  d.base_ = std::make_shared<const AtomDistribution>(base);
  d.theta_ = theta;
  return d;
}

AtomDistribution AtomDistribution::masked(const AtomDistribution& base, double mu) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("mask probability must lie in [0, 1]");
  AtomDistribution d;
  d.kind_ = AtomKind::masked;
  d.base_ = std::make_shared<const AtomDistribution>(base);
  d.mu_ = mu;
  return d;
}

bool AtomDistribution::has_exact_enumeration() const noexcept {
  switch (kind_) {
    case AtomKind::bernoulli:
    case AtomKind::discrete:
      return true;
    case AtomKind::real_gaussian:
    case AtomKind::complex_gaussian:
      return false;
    default:
      return base_->has_exact_enumeration();
  }
}

std::vector<Atom> AtomDistribution::support() const {
  switch (kind_) {
    case AtomKind::bernoulli:
      return {{Complex(-1.0, 0.0), 0.5}, {Complex(1.0, 0.0), 0.5}};
    case AtomKind::discrete:
      return atoms_;
    case AtomKind::real_gaussian:
    case AtomKind::complex_gaussian:
      throw std::logic_error("Gaussian laws have no finite support");
    case AtomKind::truncated: {
      std::vector<Atom> out = base_->support();
      for (Atom& a : out) {
        if (!(std::abs(a.value) < cutoff_)) a.value = 0.0;
      }
      return merge_atoms(std::move(out));
    }
    case AtomKind::normalized: {
      std::vector<Atom> out = base_->support();
      for (Atom& a : out) a.value = (a.value - shift_) / scale_;
      return merge_atoms(std::move(out));
    }
    case AtomKind::rotated: {
      std::vector<Atom> out = base_->support();
      const Complex phase = std::polar(1.0, theta_);
      for (Atom& a : out) a.value *= phase;
      return merge_atoms(std::move(out));
    }
    case AtomKind::masked: {
      std::vector<Atom> out = base_->support();
      for (Atom& a : out) a.prob *= mu_;
      out.push_back({0.0, 1.0 - mu_});
      return merge_atoms(std::move(out));
    }
  }
  throw std::logic_error("unknown distribution kind");
}

AtomDistribution::Moments AtomDistribution::moments() const {
  if (has_exact_enumeration()) {
    Complex m = 0.0;
    double s = 0.0;
    for (const Atom& a : support()) {
      m += a.prob * a.value;
      s += a.prob * std::norm(a.value);
    }
    return {m, s, true};
  }
  switch (kind_) {
    case AtomKind::real_gaussian:
    case AtomKind::complex_gaussian:
      return {0.0, 1.0, true};
    case AtomKind::truncated:
      if (base_->kind_ == AtomKind::complex_gaussian) return {0.0, cgauss_trunc_second(cutoff_), true};
      if (base_->kind_ == AtomKind::real_gaussian) return {0.0, rgauss_trunc_second(cutoff_), true};
      break;
    case AtomKind::normalized: {
      const Moments b = base_->moments();
      const double raw = b.second - 2.0 * std::real(std::conj(shift_) * b.mean) + std::norm(shift_);
      return {(b.mean - shift_) / scale_, std::max(0.0, raw) / (scale_ * scale_), b.exact};
    }
    case AtomKind::rotated: {
      const Moments b = base_->moments();
      return {std::polar(1.0, theta_) * b.mean, b.second, b.exact};
    }
    case AtomKind::masked: {
      const Moments b = base_->moments();
      return {mu_ * b.mean, mu_ * b.second, b.exact};
    }
    default:
      break;
  }
  // Deterministic Monte Carlo fallback.
  Complex m = 0.0;
  double s = 0.0;
  for (std::size_t k = 0; k < kMonteCarloDraws; ++k) {
    CounterRng rng(kInternalSeed, kStreamMoment, k);
    const Complex x = sample(rng);
    m += x;
    s += std::norm(x);
  }
  const double inv = 1.0 / static_cast<double>(kMonteCarloDraws);
  return {m * inv, s * inv, false};
}

Complex AtomDistribution::mean() const { return moments().mean; }
double AtomDistribution::second_moment() const { return moments().second; }
double AtomDistribution::variance() const {
  const Moments m = moments();
  return std::max(0.0, m.second - std::norm(m.mean));
}
bool AtomDistribution::moments_exact() const { return moments().exact; }

Complex AtomDistribution::sample(CounterRng& rng) const {
  switch (kind_) {
    case AtomKind::bernoulli:
      return rng.uniform() < 0.5 ? Complex(1.0, 0.0) : Complex(-1.0, 0.0);
    case AtomKind::real_gaussian:
      return {rng.normal(), 0.0};
    case AtomKind::complex_gaussian: {
      const double re = rng.normal();
      const double im = rng.normal();
      return Complex(re, im) * (1.0 / std::numbers::sqrt2);
    }
    case AtomKind::discrete: {
      const double u = rng.uniform();
      double acc = 0.0;
      for (const Atom& a : atoms_) {
        acc += a.prob;
        if (u < acc) return a.value;
      }
      return atoms_.back().value;
    }
    case AtomKind::truncated: {
      const Complex x = base_->sample(rng);
      return std::abs(x) < cutoff_ ? x : Complex(0.0, 0.0);
    }
    case AtomKind::normalized:
      return (base_->sample(rng) - shift_) / scale_;
    case AtomKind::rotated:
      return std::polar(1.0, theta_) * base_->sample(rng);
    case AtomKind::masked: {
      const Complex x = base_->sample(rng);
      return rng.uniform() < mu_ ? x : Complex(0.0, 0.0);
    }
  }
  throw std::logic_error("unknown distribution kind");
}

bool AtomDistribution::char_fn_exact() const {
  if (has_exact_enumeration()) return true;
  switch (kind_) {
    case AtomKind::real_gaussian:
    case AtomKind::complex_gaussian:
      return true;
    case AtomKind::truncated:
      return base_->kind_ == AtomKind::real_gaussian || base_->kind_ == AtomKind::complex_gaussian;
    default:
      return base_->char_fn_exact();
  }
}

Complex AtomDistribution::char_fn(Complex z) const {
  if (kind_ == AtomKind::discrete || kind_ == AtomKind::bernoulli ||
      (has_exact_enumeration() && kind_ == AtomKind::truncated)) {
    if (kind_ == AtomKind::bernoulli) return {std::cos(2.0 * kPi * z.real()), 0.0};
    Complex acc = 0.0;
    for (const Atom& a : support()) acc += a.prob * e_char((a.value * z).real());
    return acc;
  }
  switch (kind_) {
    case AtomKind::real_gaussian:
      return {std::exp(-2.0 * kPi * kPi * z.real() * z.real()), 0.0};
    case AtomKind::complex_gaussian:
      return {std::exp(-kPi * kPi * std::norm(z)), 0.0};
    case AtomKind::normalized:
      return e_char(-(z * shift_).real() / scale_) * base_->char_fn(z / scale_);
    case AtomKind::rotated:
      return base_->char_fn(z * std::polar(1.0, theta_));
    case AtomKind::masked:
      return (1.0 - mu_) + mu_ * base_->char_fn(z);
    case AtomKind::truncated: {
      const double c = cutoff_;
      if (base_->kind_ == AtomKind::real_gaussian) {
        const double x = z.real();
        const std::size_t panels = 8 + static_cast<std::size_t>(std::ceil(4.0 * std::abs(x) * c));
        const double inside = integrate(
            [x](double t) { return std::cos(2.0 * kPi * x * t) * std::exp(-0.5 * t * t) / std::sqrt(2.0 * kPi); }, -c,
            c, panels, 16);
        return {inside + 1.0 - std::erf(c / std::numbers::sqrt2), 0.0};
      }
      if (base_->kind_ == AtomKind::complex_gaussian) {
        const double k = 2.0 * kPi * std::abs(z);
        const std::size_t panels = 8 + static_cast<std::size_t>(std::ceil(2.0 * std::abs(z) * c));
        const double inside = integrate(
            [k](double rho) { return 2.0 * rho * std::exp(-rho * rho) * std::cyl_bessel_j(0.0, k * rho); }, 0.0, c,
            panels, 16);
        return {inside + std::exp(-c * c), 0.0};
      }
      break;
    }
    default:
      break;
  }
  Complex acc = 0.0;
  for (std::size_t k = 0; k < kMonteCarloDraws; ++k) {
    CounterRng rng(kInternalSeed, kStreamMoment, k);
    acc += e_char((sample(rng) * z).real());
  }
  return acc / static_cast<double>(kMonteCarloDraws);
}

bool AtomDistribution::is_symmetric() const {
  switch (kind_) {
    case AtomKind::bernoulli:
    case AtomKind::real_gaussian:
    case AtomKind::complex_gaussian:
      return true;
    case AtomKind::discrete: {
      const std::vector<Atom> neg = [&] {
        std::vector<Atom> v = atoms_;
        for (Atom& a : v) a.value = -a.value;
        return merge_atoms(std::move(v));
      }();
      if (neg.size() != atoms_.size()) return false;
      for (std::size_t k = 0; k < neg.size(); ++k) {
        if (std::abs(neg[k].value - atoms_[k].value) > 1e-12 * (1.0 + std::abs(atoms_[k].value)) ||
            std::abs(neg[k].prob - atoms_[k].prob) > 1e-14) {
          return false;
        }
      }
      return true;
    }
    case AtomKind::normalized:
      return shift_ == Complex(0.0, 0.0) && base_->is_symmetric();
    default:
      return base_->is_symmetric();
  }
}

std::string AtomDistribution::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case AtomKind::bernoulli:
      return "bernoulli";
    case AtomKind::real_gaussian:
      return "real_gaussian";
    case AtomKind::complex_gaussian:
      return "complex_gaussian";
    case AtomKind::discrete:
      os << "discrete(";
      for (std::size_t k = 0; k < atoms_.size(); ++k) {
        os << (k ? ";" : "") << format_complex(atoms_[k].value) << ":" << format_double(atoms_[k].prob);
      }
      os << ")";
      return os.str();
    case AtomKind::truncated:
      return "truncated(" + base_->describe() + "," + format_double(cutoff_) + ")";
    case AtomKind::normalized:
      return "normalized(" + base_->describe() + "," + format_complex(shift_) + "," + format_double(scale_) + ")";
    case AtomKind::rotated:
      return "rotated(" + base_->describe() + "," + format_double(theta_) + ")";
    case AtomKind::masked:
      return "masked(" + base_->describe() + "," + format_double(mu_) + ")";
  }
  return "unknown";
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Splits at top-level commas (outside parentheses).
std::vector<std::string_view> split_args(std::string_view s) {
  std::vector<std::string_view> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (s[i] == ',' && depth == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.push_back(trim(s.substr(start)));
  return out;
}

double parse_number(std::string_view s) {
  const std::string str(trim(s));
  char* end = nullptr;
  const double v = std::strtod(str.c_str(), &end);
  if (str.empty() || *end != '\0') throw std::invalid_argument("parse_distribution: bad number '" + str + "'");
  return v;
}

}  // namespace

AtomDistribution parse_distribution(std::string_view text) {
  text = trim(text);
  const std::size_t open = text.find('(');
  const std::string_view head = trim(text.substr(0, open));
  if (open == std::string_view::npos) {
    if (head == "bernoulli") return AtomDistribution::bernoulli();
    if (head == "real_gaussian") return AtomDistribution::real_gaussian();
    if (head == "complex_gaussian") return AtomDistribution::complex_gaussian();
    throw std::invalid_argument("parse_distribution: unknown law '" + std::string(text) + "'");
  }
  if (text.back() != ')') throw std::invalid_argument("parse_distribution: missing ')' in '" + std::string(text) + "'");
  const std::string_view inner = text.substr(open + 1, text.size() - open - 2);
  if (head == "discrete") {
    std::vector<Complex> values;
    std::vector<double> probs;
    std::size_t start = 0;
    while (start <= inner.size()) {
      std::size_t stop = inner.find(';', start);
      if (stop == std::string_view::npos) stop = inner.size();
      const std::string_view item = trim(inner.substr(start, stop - start));
      const std::size_t colon = item.rfind(':');
      if (colon == std::string_view::npos) throw std::invalid_argument("parse_distribution: expected value:prob");
      values.push_back(parse_complex(item.substr(0, colon)));
      probs.push_back(parse_number(item.substr(colon + 1)));
      start = stop + 1;
    }
    return AtomDistribution::discrete(std::move(values), std::move(probs));
  }
  const auto args = split_args(inner);
  const auto expect = [&](std::size_t k) {
    if (args.size() != k) throw std::invalid_argument("parse_distribution: wrong argument count in '" + std::string(text) + "'");
  };
  if (head == "point_mass") {
    expect(1);
    return AtomDistribution::point_mass(parse_complex(args[0]));
  }
  if (head == "truncated") {
    expect(2);
    return AtomDistribution::truncated(parse_distribution(args[0]), parse_number(args[1]));
  }
  if (head == "normalized") {
    expect(3);
    return AtomDistribution::normalized(parse_distribution(args[0]), parse_complex(args[1]), parse_number(args[2]));
  }
  if (head == "rotated") {
    expect(2);
    return AtomDistribution::rotated(parse_distribution(args[0]), parse_number(args[1]));
  }
  if (head == "masked") {
    expect(2);
    return AtomDistribution::masked(parse_distribution(args[0]), parse_number(args[1]));
  }
  throw std::invalid_argument("parse_distribution: unknown law '" + std::string(head) + "'");
}

std::vector<Atom> difference_law(const AtomDistribution& dist) {
  const std::vector<Atom> s = dist.support();
  std::vector<Atom> out;
  out.reserve(s.size() * s.size());
  for (const Atom& a : s) {
    for (const Atom& b : s) out.push_back({a.value - b.value, a.prob * b.prob});
  }
  return merge_atoms(std::move(out));
}

SparseSpec::SparseSpec(double alpha) : alpha_(alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("sparsity alpha must lie in [0, 1]");
}

double SparseSpec::rho(std::size_t n) const {
  if (n == 0) throw std::invalid_argument("rho(n) needs n >= 1");
  return std::pow(static_cast<double>(n), -1.0 + alpha_);
}

}  // namespace circlaw
