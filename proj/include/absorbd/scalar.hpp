#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace absorbd {

using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

enum class ScalarMode { exact, floating };

/// Default zero threshold for floating mode.
inline constexpr double kDefaultEps = 1e-9;

/// Raised when a numeric literal cannot be parsed exactly.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses "p/q", "-3", "0.125" or "1.5e-3" into an exact rational.
Rational parse_rational(std::string_view text);

/// Canonical string form: "p/q" or "p" when the denominator is 1.
std::string to_string(const Rational& q);
std::string to_string(double x);

/// Zero tests and conversions for the two number fields. Rational ignores eps.
template <class T>
struct Arith;

template <>
struct Arith<Rational> {
  double eps = 0.0;

  static Rational from(const Rational& q) { return q; }
  bool is_zero(const Rational& x) const { return x.is_zero(); }
  bool positive(const Rational& x) const { return x.sign() > 0; }
  bool negative(const Rational& x) const { return x.sign() < 0; }
  bool equal(const Rational& a, const Rational& b) const { return a == b; }
  static constexpr bool exact = true;
};

template <>
struct Arith<double> {
  double eps = kDefaultEps;

  static double from(const Rational& q) { return q.convert_to<double>(); }
  bool is_zero(double x) const { return std::abs(x) <= eps; }
  bool positive(double x) const { return x > eps; }
  bool negative(double x) const { return x < -eps; }
  bool equal(double a, double b) const { return std::abs(a - b) <= eps * (1.0 + std::abs(a) + std::abs(b)); }
  static constexpr bool exact = false;
};

template <class T>
std::vector<T> convert_vector(const std::vector<Rational>& v) {
  std::vector<T> out;
  out.reserve(v.size());
  for (const auto& q : v) out.push_back(Arith<T>::from(q));
  return out;
}

inline Rational positive_part(const Rational& x) { return x.sign() > 0 ? x : Rational(0); }
inline Rational negative_part(const Rational& x) { return x.sign() < 0 ? Rational(-x) : Rational(0); }

}  // namespace absorbd
