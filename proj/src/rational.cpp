#include "fuplab/rational.hpp"

#include <cctype>
#include <cmath>

namespace fuplab {

Rational make_rational(long num, long den) {
  if (den == 0) throw std::invalid_argument("zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

Rational parse_rational(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  size_t start = 0;
  while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
  s = s.substr(start);
  if (s.empty()) throw ParseError("empty rational");

  try {
    if (auto dot = s.find('.'); dot != std::string::npos) {
      if (s.find('/') != std::string::npos) throw ParseError("mixed decimal/fraction: " + s);
      bool neg = !s.empty() && s[0] == '-';
      std::string int_part = s.substr(neg ? 1 : 0, dot - (neg ? 1 : 0));
      std::string frac_part = s.substr(dot + 1);
      if (int_part.empty()) int_part = "0";
      if (frac_part.find_first_not_of("0123456789") != std::string::npos ||
          int_part.find_first_not_of("0123456789") != std::string::npos)
        throw ParseError("bad decimal: " + s);
      mpz_class den = 1;
      for (size_t i = 0; i < frac_part.size(); ++i) den *= 10;
      mpz_class num(int_part + frac_part, 10);
      Rational q(num, den);
      q.canonicalize();
      return neg ? Rational(-q) : q;
    }
    Rational q(s, 10);
    if (q.get_den() == 0) throw ParseError("zero denominator: " + s);
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument&) {
    throw ParseError("bad rational: " + s);
  }
}

std::string format_rational(const Rational& q) {
  Rational r = q;
  r.canonicalize();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite double");
  Rational q(x);
  q.canonicalize();
  return q;
}

double to_double(const Rational& q) { return q.get_d(); }

mpz_class floor_of(const Rational& q) {
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

mpz_class ceil_of(const Rational& q) {
  mpz_class r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

Rational rational_pow(long base, long e) {
  if (base <= 0) throw std::invalid_argument("rational_pow: base must be positive");
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), static_cast<unsigned long>(base),
                static_cast<unsigned long>(e < 0 ? -e : e));
  Rational q = e >= 0 ? Rational(p, 1) : Rational(1, p);
  q.canonicalize();
  return q;
}

Rational pow2(long e) { return rational_pow(2, e); }

}  // namespace fuplab
