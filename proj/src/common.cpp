#include "circlaw/common.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace circlaw {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_complex(Complex z) {
  std::string out = format_double(z.real());
  const double im = z.imag();
  if (std::signbit(im)) {
    out += "-" + format_double(-im) + "i";
  } else {
    out += "+" + format_double(im) + "i";
  }
  return out;
}

namespace {

double parse_real(const std::string& s, std::string_view whole) {
  if (s.empty() || s == "+") return 1.0;
  if (s == "-") return -1.0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw std::invalid_argument("cannot parse complex number '" + std::string(whole) + "'");
  }
  return v;
}

}  // namespace

Complex parse_complex(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  }
  if (s.empty()) throw std::invalid_argument("empty complex number");
  if (s.back() != 'i' && s.back() != 'j') {
    return {parse_real(s, text), 0.0};
  }
  s.pop_back();
  // Split at the last sign that is not part of an exponent and not leading.
  std::size_t split = std::string::npos;
  for (std::size_t k = s.size(); k-- > 1;) {
    if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  if (split == std::string::npos) {
    return {0.0, parse_real(s, text)};
  }
  return {parse_real(s.substr(0, split), text), parse_real(s.substr(split), text)};
}

std::vector<Complex> parse_complex_list(std::string_view text) {
  std::vector<Complex> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find_first_of(",;", start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view item = text.substr(start, end - start);
    bool blank = true;
    for (char c : item) blank = blank && std::isspace(static_cast<unsigned char>(c));
    if (!blank) out.push_back(parse_complex(item));
    start = end + 1;
  }
  return out;
}

}  // namespace circlaw
