#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace circlaw {

using Complex = std::complex<double>;

/// Raised when a distribution collapses to zero variance where a nondegenerate
/// law is required (truncation, phase rotation, ensemble configs).
class DegenerateDistribution : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when an enumeration would exceed its size cap.
class CapExceeded : public std::length_error {
 public:
  CapExceeded(const std::string& what, std::uint64_t requested, std::uint64_t cap)
      : std::length_error(what + " (requested " + std::to_string(requested) + ", cap " + std::to_string(cap) + ")"),
        requested_(requested),
        cap_(cap) {}
  std::uint64_t requested() const noexcept { return requested_; }
  std::uint64_t cap() const noexcept { return cap_; }

 private:
  std::uint64_t requested_;
  std::uint64_t cap_;
};

/// Formats z as "a+bi" / "a-bi" with round-trip precision.
std::string format_complex(Complex z);

/// Parses "a", "bi", "a+bi", "a-bi", "i", "-i" (whitespace ignored).
Complex parse_complex(std::string_view text);

/// Parses a comma- or semicolon-separated list of complex numbers.
std::vector<Complex> parse_complex_list(std::string_view text);

/// Formats a double with 17 significant digits.
std::string format_double(double x);

}  // namespace circlaw
