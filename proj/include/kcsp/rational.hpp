#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace kcsp {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// "p/q" in lowest terms, or "p" when the denominator is 1.
std::string to_string(const Rational& r);

// Accepts "p/q", "p", and an optional leading sign. Throws Error
// (invalid_request) on malformed input or a zero denominator.
Rational parse_rational(std::string_view text);

double to_double(const Rational& r);

// Exact binomial coefficient; zero outside 0 <= r <= n. Requires n <= 64.
std::uint64_t binomial(int n, int r);

// Integer square root when n is a perfect square, otherwise -1.
int exact_sqrt(int n);

// Printing with 12 significant digits, used for every float in reports.
std::string format_double(double value);

}  // namespace kcsp
