#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nilcc/bch.hpp"
#include "nilcc/fit.hpp"
#include "oracles/tensor_series.hpp"
#include "support.hpp"

using namespace nilcc;
using testing_support::random_qvec;

namespace {

oracle::Series series_of(const AssocPoly& p) {
  oracle::Series s;
  for (const auto& [w, c] : p.terms())
    if (c != 0) s[w] = c;
  return s;
}

}  // namespace

TEST_CASE("group law agrees with log(exp X exp Y) in the tensor algebra") {
  std::mt19937_64 rng(21);
  for (auto [l, d] : std::vector<std::pair<int, int>>{{2, 2}, {2, 3}, {2, 4}, {3, 2}}) {
    const NilpotentAlgebra f = build_free_nilpotent(l, d);
    for (int it = 0; it < 15; ++it) {
      const QVec x = random_qvec(rng, f.dim()), y = random_qvec(rng, f.dim());
      const auto expected = oracle::bch(series_of(tensor_image(f, x)), series_of(tensor_image(f, y)), d);
      CHECK(series_of(tensor_image(f, bch_product(f, x, y))) == expected);
    }
  }
}

TEST_CASE("Heisenberg products") {
  const NilpotentAlgebra h = build_free_nilpotent(2, 2);
  const QVec e1 = unit<Rational>(3, 0), e2 = unit<Rational>(3, 1);
  CHECK(bch_product(h, e1, e2) == QVec{1, 1, Rational(1, 2)});
  // unit square loop encloses area 1
  const QVec loop = product_of(h, std::vector<QVec>{e1, e2, neg(e1), neg(e2)});
  CHECK(loop == QVec{0, 0, 1});
  CHECK(group_commutator(h, e1, e2) == QVec{0, 0, 1});
}

TEST_CASE("associativity, identity and inverses hold exactly") {
  std::mt19937_64 rng(22);
  for (auto [l, d] : std::vector<std::pair<int, int>>{{2, 3}, {3, 3}}) {
    const NilpotentAlgebra f = build_free_nilpotent(l, d);
    const QVec e = zeros<Rational>(f.dim());
    for (int it = 0; it < 20; ++it) {
      const QVec x = random_qvec(rng, f.dim()), y = random_qvec(rng, f.dim()), z = random_qvec(rng, f.dim());
      CHECK(bch_product(f, bch_product(f, x, y), z) == bch_product(f, x, bch_product(f, y, z)));
      CHECK(bch_product(f, x, e) == x);
      CHECK(bch_product(f, e, x) == x);
      CHECK(is_zero(bch_product(f, x, group_inverse(f, x))));
      CHECK(power(f, x, 3) == scale(Rational(3), x));
    }
  }
}

TEST_CASE("dilations and the reflection are automorphisms of graded groups") {
  std::mt19937_64 rng(23);
  const NilpotentAlgebra f = build_free_nilpotent(2, 4);
  for (const Rational& t : {Rational(1, 2), Rational(2), Rational(3)})
    for (int it = 0; it < 10; ++it) {
      const QVec x = random_qvec(rng, f.dim()), y = random_qvec(rng, f.dim());
      CHECK(dilation(f, t, bch_product(f, x, y)) == bch_product(f, dilation(f, t, x), dilation(f, t, y)));
      CHECK(delta_minus_one(f, bch_product(f, x, y)) ==
            bch_product(f, delta_minus_one(f, x), delta_minus_one(f, y)));
      CHECK(scaled_product(f, t, x, y) == bch_product(f, x, y));
      CHECK(delta_minus_one(f, delta_minus_one(f, x)) == x);
    }
  const NilpotentAlgebra h = build_free_nilpotent(2, 2);
  CHECK(delta_minus_one(h, QVec{1, 1, 1}) == QVec{-1, -1, 1});
}

TEST_CASE("non-graded quotient: rescaled brackets converge at rate 1/t") {
  const NilpotentAlgebra n = testing_support::nongraded_quotient();
  std::mt19937_64 rng(24);
  const QVec x = random_qvec(rng, n.dim()), y = random_qvec(rng, n.dim());
  std::vector<double> ts, alpha, beta;
  for (int e = 0; e <= 6; ++e) {
    const double t = std::pow(10.0, 1 + e * 0.5);
    const Rational tq = exact_rational(std::round(t));
    ts.push_back(tq.get_d());
    alpha.push_back(norm(alpha_residual(n, tq, x, y)));
    beta.push_back(norm(beta_residual(n, tq, x, y)));
  }
  CHECK(fit_loglog(ts, alpha).slope == doctest::Approx(-1).epsilon(0.1));
  CHECK(fit_loglog(ts, beta).slope == doctest::Approx(-1).epsilon(0.1));
  // x o_a (-x) = e in the asymptotic group
  CHECK(is_zero(asymptotic_product(n, x, neg(x))));
}

TEST_CASE("beta constant is finite on a sample") {
  const NilpotentAlgebra n = testing_support::nongraded_quotient();
  std::mt19937_64 rng(25);
  std::vector<std::pair<QVec, QVec>> pairs;
  for (int i = 0; i < 10; ++i) pairs.emplace_back(random_qvec(rng, n.dim()), random_qvec(rng, n.dim()));
  const BetaCertificate c = certify_beta_constant(n, pairs, {Rational(10), Rational(100), Rational(1000)});
  CHECK(c.finite);
  CHECK(c.constant > 0);
  const NilpotentAlgebra h = build_free_nilpotent(2, 2);
  const BetaCertificate g = certify_beta_constant(h, {{QVec{1, 2, 3}, QVec{-1, 1, 0}}}, {Rational(10)});
  CHECK(g.constant == 0);
}

TEST_CASE("BCH table caches are consistent across degrees") {
  const BchTable& t4 = bch_table(4);
  const BchTable& t3 = bch_table(3);
  CHECK(t4.max_degree == 4);
  CHECK(t3.max_degree == 3);
  CHECK(t4.terms.size() > t3.terms.size());
}
