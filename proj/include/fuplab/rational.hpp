#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <string>
#include <string_view>

namespace fuplab {

/// Exact rational number, always kept in lowest terms with a positive denominator.
using Rational = mpq_class;

/// Thrown when a textual rational or interval set cannot be parsed.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Rational make_rational(long num, long den = 1);

/// Parses "p/q", "p" or a finite decimal such as "0.125" exactly.
Rational parse_rational(std::string_view text);

/// Formats as "num/den" in lowest terms (denominator always printed).
std::string format_rational(const Rational& q);

/// Exact conversion of a finite double.
Rational rational_from_double(double x);

double to_double(const Rational& q);

mpz_class floor_of(const Rational& q);
mpz_class ceil_of(const Rational& q);

/// 2^e for any integer e.
Rational pow2(long e);

/// base^e for integer base > 0 and any integer e.
Rational rational_pow(long base, long e);

}  // namespace fuplab
