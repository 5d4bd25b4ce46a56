#ifndef NCPOP_RATIONAL_HPP
#define NCPOP_RATIONAL_HPP

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/eigen.hpp>

namespace ncpop {

/// Exact coefficient type of the symbolic layer. Expression templates are
/// disabled so that `auto` and mixed arithmetic behave like a value type.
using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;
using BigInt = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                             boost::multiprecision::et_off>;

namespace detail {

template <class T>
struct scalar_traits {
  static bool is_zero(const T& v) { return v == T(0); }
  static double to_double(const T& v) { return static_cast<double>(v); }
};

template <>
struct scalar_traits<Rational> {
  static bool is_zero(const Rational& v) { return v.is_zero(); }
  static double to_double(const Rational& v) { return v.convert_to<double>(); }
};

}  // namespace detail

template <class T>
inline bool is_zero(const T& v) {
  return detail::scalar_traits<T>::is_zero(v);
}

template <class T>
inline double to_double(const T& v) {
  return detail::scalar_traits<T>::to_double(v);
}

/// Exact conversion: every finite double is a dyadic rational.
inline Rational exact_rational(double v) {
  if (!std::isfinite(v)) throw std::domain_error("exact_rational: non-finite value");
  if (v == 0.0) return Rational(0);
  int exponent = 0;
  double mantissa = std::frexp(v, &exponent);
  // 53 bits of mantissa as an integer
  auto m = static_cast<std::int64_t>(std::ldexp(mantissa, 53));
  exponent -= 53;
  Rational r{BigInt(m)};
  if (exponent > 0) {
    r *= Rational(BigInt(1) << exponent);
  } else if (exponent < 0) {
    r /= Rational(BigInt(1) << (-exponent));
  }
  return r;
}

/// Parses `123`, `-1.75`, `3/4`, `2.5e-3` into an exact rational.
/// Returns the number of characters consumed, 0 on failure.
inline std::size_t parse_rational_prefix(std::string_view text, Rational& out) {
  std::size_t i = 0;
  auto digit = [&](std::size_t k) { return k < text.size() && text[k] >= '0' && text[k] <= '9'; };
  BigInt mant = 0;
  int scale = 0;
  bool any = false;
  while (digit(i)) {
    mant = mant * 10 + (text[i] - '0');
    ++i;
    any = true;
  }
  if (i < text.size() && text[i] == '.') {
    std::size_t j = i + 1;
    bool frac = false;
    while (digit(j)) {
      mant = mant * 10 + (text[j] - '0');
      --scale;
      ++j;
      frac = true;
    }
    if (!any && !frac) return 0;
    any = true;
    i = j;
  }
  if (!any) return 0;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    std::size_t j = i + 1;
    int sign = 1;
    if (j < text.size() && (text[j] == '+' || text[j] == '-')) {
      sign = text[j] == '-' ? -1 : 1;
      ++j;
    }
    if (digit(j)) {
      int e = 0;
      while (digit(j)) {
        if (e < 100000) e = e * 10 + (text[j] - '0');
        ++j;
      }
      scale += sign * e;
      i = j;
    }
  }
  Rational value(mant);
  if (scale > 0) value *= Rational(boost::multiprecision::pow(BigInt(10), scale));
  if (scale < 0) value /= Rational(boost::multiprecision::pow(BigInt(10), -scale));
  if (i < text.size() && text[i] == '/' && digit(i + 1)) {
    std::size_t j = i + 1;
    BigInt den = 0;
    while (digit(j)) {
      den = den * 10 + (text[j] - '0');
      ++j;
    }
    if (den == 0) return 0;
    value /= Rational(den);
    i = j;
  }
  out = value;
  return i;
}

/// Decimal text with 17 significant digits; integral values print without exponent.
inline std::string format_double(double v) {
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline std::string format_coefficient(const Rational& v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

inline std::string format_coefficient(double v) { return format_double(v); }

}  // namespace ncpop

#endif  // NCPOP_RATIONAL_HPP
