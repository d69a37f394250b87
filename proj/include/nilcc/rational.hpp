#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <string>
#include <vector>

namespace nilcc {

using Rational = mpq_class;

template <class S>
using Vec = std::vector<S>;

using QVec = Vec<Rational>;
using DVec = Vec<double>;

/// Error raised for violated preconditions and invalid inputs. `code` is a
/// short machine-readable tag (e.g. "too_large", "algebra_mismatch").
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static Rational from_rational(const Rational& q) { return q; }
  static double to_double(const Rational& q) { return q.get_d(); }
  static bool is_zero(const Rational& q) { return sgn(q) == 0; }
};

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static double from_rational(const Rational& q) { return q.get_d(); }
  static double to_double(double x) { return x; }
  static bool is_zero(double x) { return x == 0.0; }
};

template <class S>
S from_rational(const Rational& q) {
  return ScalarTraits<S>::from_rational(q);
}

template <class S>
double to_double(const S& x) {
  return ScalarTraits<S>::to_double(x);
}

/// "p/q" or "p" (also accepts decimal literals such as "0.25").
Rational parse_rational(const std::string& text);
std::string to_string(const Rational& q);

/// Exact conversion of a finite double.
Rational exact_rational(double x);

/// A rational close to x with a power-of-two denominator (2^-bits grid).
Rational dyadic_approx(double x, int bits = 24);

DVec to_double(const QVec& v);
QVec to_rational(const DVec& v);

template <class S>
Vec<S> zeros(std::size_t n) {
  return Vec<S>(n, S(0));
}

template <class S>
Vec<S> unit(std::size_t n, std::size_t i) {
  Vec<S> v(n, S(0));
  v.at(i) = S(1);
  return v;
}

template <class S>
void axpy(Vec<S>& y, const S& a, const Vec<S>& x) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!ScalarTraits<S>::is_zero(x[i])) y[i] += a * x[i];
  }
}

template <class S>
Vec<S> add(const Vec<S>& x, const Vec<S>& y) {
  Vec<S> r(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += y[i];
  return r;
}

template <class S>
Vec<S> sub(const Vec<S>& x, const Vec<S>& y) {
  Vec<S> r(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= y[i];
  return r;
}

template <class S>
Vec<S> scale(const S& a, const Vec<S>& x) {
  Vec<S> r(x);
  for (auto& c : r) c *= a;
  return r;
}

template <class S>
Vec<S> neg(const Vec<S>& x) {
  Vec<S> r(x);
  for (auto& c : r) c = -c;
  return r;
}

template <class S>
bool is_zero(const Vec<S>& x) {
  for (const auto& c : x)
    if (!ScalarTraits<S>::is_zero(c)) return false;
  return true;
}

template <class S>
double norm(const Vec<S>& x);

template <class S>
double dot_d(const Vec<S>& x, const Vec<S>& y);

}  // namespace nilcc
