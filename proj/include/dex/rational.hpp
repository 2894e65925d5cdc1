#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/gmp.hpp>

namespace dex {

using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

/// Accepts "p/q", signed integers and plain decimals ("0.25", "-1.5e-3").
/// Decimals are converted exactly. Throws std::invalid_argument.
Rational parse_rational(std::string_view text);

/// "p/q" in lowest terms, or "p" when the denominator is one.
std::string to_string(const Rational& value);

double to_double(const Rational& value);

/// Closest fraction with denominator <= max_denominator (ties resolve to the
/// smaller denominator).
Rational nearest_rational(const Rational& value, std::uint64_t max_denominator);

Integer lcm(const Integer& a, const Integer& b);

/// Least common multiple of the reduced denominators.
Integer common_denominator(std::span<const Rational> values);

}  // namespace dex
