#include "dex/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace dex {

namespace {

Integer parse_integer(std::string_view digits, std::string_view original) {
  if (digits.empty()) {
    throw std::invalid_argument("malformed number '" + std::string(original) + "'");
  }
  for (char c : digits) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw std::invalid_argument("malformed number '" + std::string(original) + "'");
    }
  }
  // GMP reads a leading zero as an octal prefix.
  const auto first = digits.find_first_not_of('0');
  return first == std::string_view::npos ? Integer(0) : Integer(std::string(digits.substr(first)));
}

Integer pow10(long exponent) {
  Integer result = 1;
  for (long i = 0; i < exponent; ++i) result *= 10;
  return result;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const std::string_view original = text;
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);

  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }

  Rational value;
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const Integer num = parse_integer(text.substr(0, slash), original);
    const Integer den = parse_integer(text.substr(slash + 1), original);
    if (den == 0) throw std::invalid_argument("zero denominator in '" + std::string(original) + "'");
    value = Rational(num, den);
  } else {
    long exponent = 0;
    if (const auto e = text.find_first_of("eE"); e != std::string_view::npos) {
      std::string_view exp_text = text.substr(e + 1);
      bool exp_negative = false;
      if (!exp_text.empty() && (exp_text.front() == '-' || exp_text.front() == '+')) {
        exp_negative = exp_text.front() == '-';
        exp_text.remove_prefix(1);
      }
      if (exp_text.empty() || exp_text.size() > 6) {
        throw std::invalid_argument("malformed exponent in '" + std::string(original) + "'");
      }
      exponent = parse_integer(exp_text, original).convert_to<long>();
      if (exp_negative) exponent = -exponent;
      text = text.substr(0, e);
    }
    std::string digits;
    if (const auto dot = text.find('.'); dot != std::string_view::npos) {
      const std::string_view whole = text.substr(0, dot);
      const std::string_view frac = text.substr(dot + 1);
      if (whole.empty() && frac.empty()) {
        throw std::invalid_argument("malformed number '" + std::string(original) + "'");
      }
      digits = std::string(whole) + std::string(frac);
      exponent -= static_cast<long>(frac.size());
    } else {
      digits = std::string(text);
    }
    const Integer mantissa = parse_integer(digits, original);
    value = exponent >= 0 ? Rational(mantissa * pow10(exponent))
                          : Rational(mantissa, pow10(-exponent));
  }
  return negative ? Rational(-value) : value;
}

std::string to_string(const Rational& value) {
  const Integer den = boost::multiprecision::denominator(value);
  const Integer num = boost::multiprecision::numerator(value);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

Rational nearest_rational(const Rational& value, std::uint64_t max_denominator) {
  if (max_denominator == 0) throw std::invalid_argument("max_denominator must be positive");
  Integer p = boost::multiprecision::numerator(value);
  Integer q = boost::multiprecision::denominator(value);
  if (q <= max_denominator) return value;

  // Continued-fraction convergents plus the best semiconvergent.
  Integer p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  Integer n = p, d = q;
  for (;;) {
    Integer a = n / d;
    if (n < 0 && a * d != n) a -= 1;  // floor for negatives
    const Integer q2 = q0 + a * q1;
    if (q2 > max_denominator) break;
    const Integer p2 = p0 + a * p1;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const Integer r = n - a * d;
    n = d;
    d = r;
    if (d == 0) break;
  }
  const Integer k = (Integer(max_denominator) - q0) / q1;
  const Rational semi(p0 + k * p1, q0 + k * q1);
  const Rational conv(p1, q1);
  const Rational semi_err = abs(semi - value);
  const Rational conv_err = abs(conv - value);
  if (semi_err < conv_err) return semi;
  if (conv_err < semi_err) return conv;
  return (q1 <= q0 + k * q1) ? conv : semi;
}

Integer lcm(const Integer& a, const Integer& b) {
  if (a == 0 || b == 0) return 0;
  return abs(a / boost::multiprecision::gcd(a, b) * b);
}

Integer common_denominator(std::span<const Rational> values) {
  Integer result = 1;
  for (const auto& v : values) result = lcm(result, boost::multiprecision::denominator(v));
  return result;
}

}  // namespace dex
