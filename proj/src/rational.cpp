#include "nilcc/rational.hpp"

#include <cmath>

namespace nilcc {

Rational parse_rational(const std::string& text) {
  if (text.empty()) throw Error("parse", "empty rational literal");
  auto dot = text.find('.');
  auto e = text.find_first_of("eE");
  if (dot != std::string::npos || e != std::string::npos) {
    // decimal literal: interpret digits exactly
    std::string mant = e == std::string::npos ? text : text.substr(0, e);
    long exp10 = e == std::string::npos ? 0 : std::stol(text.substr(e + 1));
    bool negative = !mant.empty() && mant[0] == '-';
    if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) mant = mant.substr(1);
    auto d = mant.find('.');
    std::string digits = mant;
    if (d != std::string::npos) {
      exp10 -= static_cast<long>(mant.size() - d - 1);
      digits = mant.substr(0, d) + mant.substr(d + 1);
    }
    if (digits.empty()) throw Error("parse", "bad decimal literal: " + text);
    mpz_class num(digits, 10);
    mpz_class p10;
    mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exp10)));
    Rational q = exp10 >= 0 ? Rational(num * p10) : Rational(num, p10);
    q.canonicalize();
    return negative ? Rational(-q) : q;
  }
  Rational q;
  if (q.set_str(text, 10) != 0) throw Error("parse", "bad rational literal: " + text);
  if (sgn(q.get_den()) == 0) throw Error("parse", "zero denominator: " + text);
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rational exact_rational(double x) {
  if (!std::isfinite(x)) throw Error("parse", "non-finite value cannot be made rational");
  Rational q(x);
  q.canonicalize();
  return q;
}

Rational dyadic_approx(double x, int bits) {
  double scaled = std::nearbyint(std::ldexp(x, bits));
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 2, static_cast<unsigned long>(bits));
  Rational q(mpz_class(scaled), den);
  q.canonicalize();
  return q;
}

DVec to_double(const QVec& v) {
  DVec r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = v[i].get_d();
  return r;
}

QVec to_rational(const DVec& v) {
  QVec r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = exact_rational(v[i]);
  return r;
}

template <class S>
double norm(const Vec<S>& x) {
  double s = 0;
  for (const auto& c : x) {
    double d = to_double(c);
    s += d * d;
  }
  return std::sqrt(s);
}

template <class S>
double dot_d(const Vec<S>& x, const Vec<S>& y) {
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += to_double(x[i]) * to_double(y[i]);
  return s;
}

template double norm(const QVec&);
template double norm(const DVec&);
template double dot_d(const QVec&, const QVec&);
template double dot_d(const DVec&, const DVec&);

}  // namespace nilcc
