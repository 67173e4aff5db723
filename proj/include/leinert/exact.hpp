#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>

namespace leinert {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline BigInt ipow(BigInt base, unsigned exp) {
  BigInt out = 1;
  while (exp) {
    if (exp & 1u) out *= base;
    base *= base;
    exp >>= 1;
  }
  return out;
}

inline std::string to_string(const BigInt& v) { return v.str(); }

/// "p/q", or "p" when the denominator is 1.
inline std::string to_string(const Rational& v) {
  auto num = boost::multiprecision::numerator(v);
  auto den = boost::multiprecision::denominator(v);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

inline Rational parse_rational(const std::string& text) {
  auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return Rational(BigInt(text));
    BigInt num(text.substr(0, slash)), den(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator");
    return Rational(num, den);
  } catch (const std::runtime_error&) {
    throw std::invalid_argument("invalid rational '" + text + "'");
  }
}

inline double to_double(const Rational& v) { return v.convert_to<double>(); }

}  // namespace leinert
