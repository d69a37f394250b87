#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nilcc/semidirect.hpp"
#include "support.hpp"

using namespace nilcc;
using testing_support::random_qvec;

namespace {

QMatrix shear_derivation() {
  QMatrix d(3, QVec(3, Rational(0)));
  d[1][0] = 1;  // e1 -> e2
  return d;
}

QMatrix diagonal_derivation(const Rational& a, const Rational& b) {
  QMatrix d(3, QVec(3, Rational(0)));
  d[0][0] = a;
  d[1][1] = b;
  d[2][2] = a + b;
  return d;
}

}  // namespace

TEST_CASE("derivation checks") {
  const NilpotentAlgebra h = build_free_nilpotent(2, 2);
  const SemidirectGroup g(h, shear_derivation());
  const DerivationReport r = g.check_derivation();
  CHECK(r.derivation);
  CHECK(r.layer1_invariant);
  CHECK(g.nilpotent_action());
  QMatrix bad(3, QVec(3, Rational(0)));
  bad[0][0] = 1;  // e3 would have to scale by 1 as well
  const SemidirectGroup gb(h, bad);
  CHECK_FALSE(gb.check_derivation().derivation);
}

TEST_CASE("nilpotent action: exact flows, associativity and inverses") {
  const NilpotentAlgebra h = build_free_nilpotent(2, 2);
  const SemidirectGroup g(h, shear_derivation());
  std::mt19937_64 rng(51);
  for (int it = 0; it < 30; ++it) {
    const QVec x = random_qvec(rng, 3), y = random_qvec(rng, 3);
    const Rational t = random_qvec(rng, 1)[0];
    CHECK(g.flow(t, bch_product(h, x, y)) == bch_product(h, g.flow(t, x), g.flow(t, y)));
    const QSdPoint p{t, x}, q{random_qvec(rng, 1)[0], y}, r{random_qvec(rng, 1)[0], random_qvec(rng, 3)};
    const QSdPoint left = g.product(g.product(p, q), r), right = g.product(p, g.product(q, r));
    CHECK(left.t == right.t);
    CHECK(left.x == right.x);
    const QSdPoint e = g.product(p, g.inverse(p));
    CHECK(sgn(e.t) == 0);
    CHECK(is_zero(e.x));
  }
  CHECK(g.flow(Rational(2), QVec{1, 0, 0}) == QVec{1, 2, 0});
}

TEST_CASE("diagonal derivation: flow and M in closed form") {
  const NilpotentAlgebra h = build_free_nilpotent(2, 2);
  const SemidirectGroup g(h, diagonal_derivation(Rational(3, 10), Rational(-1, 5)));
  CHECK(g.check_derivation().derivation);
  CHECK_FALSE(g.nilpotent_action());
  const DVec y = g.flow(0.7, DVec{1, 1, 1});
  CHECK(y[0] == doctest::Approx(std::exp(0.21)));
  CHECK(y[1] == doctest::Approx(std::exp(-0.14)));
  CHECK(y[2] == doctest::Approx(std::exp(0.07)));
  const ConstantM m = g.constant_M();
  CHECK(m.grid_value == doctest::Approx(std::exp(0.3)).epsilon(1e-6));
  CHECK(m.certified >= m.grid_value - 1e-12);
  std::vector<std::pair<DVec, DVec>> pairs{{{1, 2, 3}, {-1, 0.5, 2}}, {{0.3, -0.2, 0.1}, {2, 1, -1}}};
  CHECK(g.automorphism_residual(0.9, pairs) <= 1e-9);
}

TEST_CASE("exp_G agrees with a fine product of small steps") {
  const NilpotentAlgebra h = build_free_nilpotent(2, 2);
  for (const QMatrix& d : {shear_derivation(), diagonal_derivation(Rational(1, 2), Rational(1, 4))}) {
    const SemidirectGroup g(h, d);
    const double tau = 0.7;
    const DVec xi{1, 0.5, 0.3};
    const std::size_t steps = 200000;
    DSdPoint fine = g.identity<double>();
    const DSdPoint small{tau / steps, scale(1.0 / steps, xi)};
    for (std::size_t i = 0; i < steps; ++i) fine = g.product(fine, small);
    const DSdPoint m = g.exp_G(tau, xi);
    CHECK(m.t == doctest::Approx(fine.t));
    for (std::size_t i = 0; i < 3; ++i) CHECK(m.x[i] == doctest::Approx(fine.x[i]).epsilon(1e-4));
  }
}

TEST_CASE("ball inclusion through the action") {
  const NilpotentAlgebra h = build_free_nilpotent(2, 2);
  const SemidirectGroup g(h, shear_derivation());
  const Lemma4Report r = lemma4_inclusion_check(g, {0, 0, 0.3}, 0.1, 0.2, 4, 10, 3);
  CHECK(r.precondition_ok);
  CHECK(r.verified == r.samples);
  CHECK(r.worst_factor_length <= r.allowed_length);
  CHECK(r.worst_product_error <= 1e-9);
  CHECK_FALSE(lemma4_inclusion_check(g, {0.2, -0.1, 0.3}, 0.1, 0.2, 4, 10, 3).precondition_ok);
  CHECK_FALSE(lemma4_inclusion_check(g, {0, 0, 0.3}, 0.1, 0.25, 4, 10, 3).precondition_ok);
}

TEST_CASE("halfspace bookkeeping") {
  CHECK(chi(DSdPoint{0.5, {0, 0, 0}}) == 0.5);
  CHECK(halfspace_contains(DSdPoint{0.0, {1, 0, 0}}));
  CHECK_FALSE(halfspace_contains(DSdPoint{-1e-3, {0, 0, 0}}));
}
