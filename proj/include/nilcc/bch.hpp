#pragma once

#include <vector>

#include "nilcc/lie_algebra.hpp"

namespace nilcc {

/// Degree-truncated Campbell-Hausdorff series in Dynkin form. Every term is a
/// right-nested bracket [a_1,[a_2,[...,a_m]]] of letters a_i in {x, y}; terms
/// share suffixes, so they are stored as a DAG of nested brackets.
struct BchTable {
  struct Node {
    int letter;  // 0 = x, 1 = y
    int tail;    // index of the nested bracket this letter is applied to, -1 for a bare letter
    int degree;
  };
  struct TermRef {
    int node;
    Rational coeff;
    double coeff_d;
  };
  int max_degree = 1;
  std::vector<Node> nodes;     // ordered so that tail < own index
  std::vector<TermRef> terms;  // degree >= 2 only; x + y is added separately

  /// Homogeneous degree-k part as (word over {'x','y'}, coefficient) pairs.
  std::vector<std::pair<std::string, Rational>> degree_part(int k) const;
};

/// Shared table up to the given degree (built once, thread-safe).
const BchTable& bch_table(int max_degree);

template <class S>
Vec<S> bch_product(const NilpotentAlgebra& a, const Vec<S>& x, const Vec<S>& y);

template <class S>
Vec<S> group_inverse(const NilpotentAlgebra& a, const Vec<S>& x) {
  a.check(x);
  return neg(x);
}

/// x y x^{-1} y^{-1}.
template <class S>
Vec<S> group_commutator(const NilpotentAlgebra& a, const Vec<S>& x, const Vec<S>& y);

/// x^n, which is n x because one-parameter subgroups are lines.
template <class S>
Vec<S> power(const NilpotentAlgebra& a, const Vec<S>& x, long n) {
  a.check(x);
  return scale(S(n), x);
}

/// Product of a sequence, folded left to right.
template <class S>
Vec<S> product_of(const NilpotentAlgebra& a, const std::vector<Vec<S>>& factors);

/// Layer k scaled by t^k, using the algebra's declared layers.
template <class S>
Vec<S> dilation(const NilpotentAlgebra& a, const S& t, const Vec<S>& x);

/// Layer k scaled by (-1)^k.
template <class S>
Vec<S> delta_minus_one(const NilpotentAlgebra& a, const Vec<S>& x);

/// delta_t^{-1}(delta_t x . delta_t y).
template <class S>
Vec<S> scaled_product(const NilpotentAlgebra& a, const S& t, const Vec<S>& x, const Vec<S>& y);

/// Bracket of the associated graded algebra: for x in layer k and y in layer
/// l keep only the layer-(k+l) part of [x, y].
template <class S>
Vec<S> asymptotic_bracket(const NilpotentAlgebra& a, const Vec<S>& x, const Vec<S>& y);

/// delta_t^{-1}[delta_t x, delta_t y].
template <class S>
Vec<S> scaled_bracket(const NilpotentAlgebra& a, const S& t, const Vec<S>& x, const Vec<S>& y);

/// Product of the asymptotic group (BCH in asymptotic_algebra(a)).
template <class S>
Vec<S> asymptotic_product(const NilpotentAlgebra& a, const Vec<S>& x, const Vec<S>& y);

/// scaled_product(t, x, y) - asymptotic_product(x, y).
template <class S>
Vec<S> beta_residual(const NilpotentAlgebra& a, const S& t, const Vec<S>& x, const Vec<S>& y);

/// scaled_bracket(t, x, y) - asymptotic_bracket(x, y).
template <class S>
Vec<S> alpha_residual(const NilpotentAlgebra& a, const S& t, const Vec<S>& x, const Vec<S>& y);

struct BetaSample {
  double t;
  double residual_norm;
  double ratio;  // t |beta| / ((|x|+|x|^d)(|y|+|y|^d))
};

struct BetaCertificate {
  double constant = 0;  // smallest A for which the bound holds on every sample
  bool finite = true;
  std::vector<BetaSample> samples;
};

/// Empirical constant A with |beta(x,y,t)| <= (A/t)(|x|+|x|^d)(|y|+|y|^d) on
/// the given pairs and t values (exact residuals, converted at the end).
BetaCertificate certify_beta_constant(const NilpotentAlgebra& a,
                                      const std::vector<std::pair<QVec, QVec>>& pairs,
                                      const std::vector<Rational>& t_values);

}  // namespace nilcc
