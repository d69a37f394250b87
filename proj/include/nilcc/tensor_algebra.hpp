#pragma once

#include <map>
#include <string>
#include <vector>

#include "nilcc/rational.hpp"

namespace nilcc {

/// A word over the alphabet {0, ..., l-1}; letter i is stored as char(i).
using Word = std::string;

/// Noncommutative polynomial in the free associative algebra, truncated
/// above a fixed degree. Coefficients are exact rationals.
class AssocPoly {
 public:
  explicit AssocPoly(int max_degree = 0) : max_degree_(max_degree) {}

  static AssocPoly letter(int max_degree, int i);
  static AssocPoly scalar(int max_degree, const Rational& c);

  int max_degree() const { return max_degree_; }
  const std::map<Word, Rational>& terms() const { return terms_; }
  Rational coeff(const Word& w) const;
  void add_term(const Word& w, const Rational& c);

  AssocPoly& operator+=(const AssocPoly& o);
  AssocPoly& operator-=(const AssocPoly& o);
  AssocPoly& operator*=(const Rational& c);
  friend AssocPoly operator+(AssocPoly a, const AssocPoly& b) { return a += b; }
  friend AssocPoly operator-(AssocPoly a, const AssocPoly& b) { return a -= b; }
  friend AssocPoly operator*(const AssocPoly& a, const AssocPoly& b);
  friend AssocPoly operator*(AssocPoly a, const Rational& c) { return a *= c; }
  friend bool operator==(const AssocPoly& a, const AssocPoly& b) { return a.terms_ == b.terms_; }

  bool is_zero() const { return terms_.empty(); }
  /// Homogeneous part of the given degree.
  AssocPoly part(int degree) const;
  /// Constant term.
  Rational constant() const { return coeff(Word{}); }

 private:
  int max_degree_;
  std::map<Word, Rational> terms_;
};

AssocPoly commutator(const AssocPoly& a, const AssocPoly& b);

/// Truncated exp and log (log requires constant term 1).
AssocPoly exp_series(const AssocPoly& x);
AssocPoly log_series(const AssocPoly& x);

bool is_lyndon(const Word& w);

/// Lyndon words of length 1..max_length over l letters, ordered by length
/// then lexicographically.
std::vector<Word> lyndon_words(int letters, int max_length);

/// Standard factorization w = uv with v the longest proper Lyndon suffix.
std::pair<Word, Word> standard_factorization(const Word& w);

/// Expansion of the standard bracketing P(w) of a Lyndon word in the
/// free associative algebra.
AssocPoly lyndon_bracket(const Word& w, int max_degree);

/// Printable bracket form, letters printed 1-based: "[1,[1,2]]".
std::string lyndon_label(const Word& w);

}  // namespace nilcc
