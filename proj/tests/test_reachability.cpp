#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nilcc/reachability.hpp"
#include "support.hpp"

using namespace nilcc;

namespace {

QVec top_unit(const NilpotentAlgebra& a) {
  QVec z = zeros<Rational>(a.dim());
  z[a.dim() - 1] = 1;
  return z;
}

QWord straight(std::size_t dim, std::vector<std::pair<std::size_t, Rational>> coords) {
  QVec dir = zeros<Rational>(dim);
  for (auto& [i, c] : coords) dir[i] = c;
  return QWord{{{dir, Rational(1)}}, "horizontal"};
}

/// Every certificate must reach center^{-1} factor exactly.
void check_certificates(const NilpotentAlgebra& a, const Factorization& f) {
  REQUIRE(f.factors.size() == f.certificates.size());
  const QVec back = neg(f.center);
  for (std::size_t i = 0; i < f.factors.size(); ++i)
    CHECK(endpoint(a, f.certificates[i]) == bch_product(a, back, f.factors[i]));
}

}  // namespace

TEST_CASE("threshold search: witnessed, closed and monotone") {
  const NilpotentAlgebra h = build_free_nilpotent(2, 2);
  const ReachExperiment ex = lemma1_threshold(h, top_unit(h), {0.3, 0.6, 1.2}, {}, true);
  CHECK(ex.monotone);
  CHECK(ex.complete);
  REQUIRE(ex.witnesses.size() == 3);
  for (std::size_t i = 0; i < ex.rows.size(); ++i) {
    const auto& r = ex.rows[i];
    CHECK(r.witnessed);
    CHECK(r.closed);
    CHECK(r.n_lo <= r.n_hi);
    CHECK(r.max_factor_distance < r.eps);
  }
  for (const auto& f : ex.witnesses) {
    CHECK(f.closed);
    CHECK(is_zero(product_of(h, f.factors)));
    check_certificates(h, f);
  }
}

TEST_CASE("threshold search: eps beyond the distance gives n = 1") {
  const NilpotentAlgebra h = build_free_nilpotent(2, 2);
  const ReachExperiment ex = lemma1_threshold(h, top_unit(h), {4.5});
  CHECK(ex.rows[0].n_hi == 1);
}

TEST_CASE("threshold search rejects targets outside the top layer") {
  const NilpotentAlgebra h = build_free_nilpotent(2, 2);
  CHECK_THROWS_AS(lemma1_threshold(h, QVec{1, 0, 0}, {0.5}), Error);
  CHECK_THROWS_AS(lemma1_threshold(testing_support::nongraded_quotient(), QVec{0, 0, 0, 0, 1}, {0.5}), Error);
}

TEST_CASE("ball inclusion") {
  const NilpotentAlgebra h = build_free_nilpotent(2, 2);
  const QVec z = top_unit(h);
  SUBCASE("hypothesis holds: samples factorize") {
    const BallInclusionReport r = lemma1_ball_inclusion(h, z, 0.5, 0.2, 200, 8, 1);
    CHECK(r.hypothesis);
    CHECK(r.verdict == "verified");
    CHECK(r.factorized == r.samples);
  }
  SUBCASE("s = 0 reduces to the core statement") {
    const BallInclusionReport r = lemma1_ball_inclusion(h, z, 0.5, 0.0, 200, 8, 1);
    CHECK(r.verdict == "verified");
  }
  SUBCASE("hypothesis fails: no claim") {
    const BallInclusionReport r = lemma1_ball_inclusion(h, z, 0.5, 0.2, 3, 8, 1);
    CHECK_FALSE(r.hypothesis);
    CHECK(r.verdict == "not implied");
  }
}

TEST_CASE("reflection word, even step") {
  const NilpotentAlgebra h = build_free_nilpotent(2, 2);
  const QVec x{Rational(1, 4), 0, 0};
  // three pieces whose first-layer parts cancel x three times over
  const std::vector<QWord> pieces{straight(3, {{0, Rational(-1, 4)}, {1, Rational(1, 8)}}),
                                  straight(3, {{0, Rational(-1, 4)}, {1, Rational(-1, 8)}}),
                                  straight(3, {{0, Rational(-1, 4)}})};
  double eps = 0;
  for (const auto& p : pieces) eps = std::max(eps, word_length(p));
  const Factorization f = lemma2_reflection_word(h, x, pieces);
  CHECK(f.factors.size() == 6);
  CHECK(f.closed);
  CHECK(is_zero(product_of(h, f.factors)));
  CHECK(f.max_certificate_length <= 2 * eps + 1e-12);
  check_certificates(h, f);
  CHECK(lemma2_reflection_word(h, x, {}).factors.empty());
  CHECK_THROWS_AS(lemma2_reflection_word(h, x, {straight(3, {{1, Rational(1)}})}), Error);
}

TEST_CASE("reflection word, odd step, through the quotient") {
  const NilpotentAlgebra f = build_free_nilpotent(2, 3);
  QVec x = zeros<Rational>(5);
  x[2] = 1;
  auto w = corollary2_factorization(f, x, 0.8);
  REQUIRE(w);
  CHECK(w->closed);
  CHECK(is_zero(product_of(f, w->factors)));
  CHECK(w->max_certificate_length < 0.8);
  check_certificates(f, *w);
}

TEST_CASE("quotient threshold bound arithmetic") {
  const NilpotentAlgebra f = build_free_nilpotent(2, 3);
  QVec x = zeros<Rational>(5);
  x[2] = 1;
  const Corollary2Experiment ex = corollary2_threshold(f, x, {0.5, 1.0});
  for (const auto& r : ex.rows) {
    CHECK(r.closed);
    CHECK(r.within_bound);
    CHECK(r.witnessed_n == 2 * r.quotient_n);
    CHECK(r.bound == doctest::Approx(2 * std::pow(2 * ex.radius / r.eps, 2.0)));
  }
}

TEST_CASE("free lift on a non-graded quotient projects to exact identities") {
  const NilpotentAlgebra n = testing_support::nongraded_quotient();
  QVec x = zeros<Rational>(n.dim());
  x[n.layer_indices(n.step()).front()] = 1;
  const Theorem2Experiment ex = theorem2_lifted_threshold(n, x, n.step(), {0.8, 1.6});
  CHECK(ex.lifted_dim == 8);
  for (const auto& r : ex.rows) {
    CHECK(r.n > 0);
    CHECK(r.pushed_closed);
  }
  CHECK_THROWS_AS(theorem2_lifted_threshold(n, QVec{1, 0, 0, 0, 0}, n.step(), {1.0}), Error);
}

TEST_CASE("free-lift threshold on a graded input matches the direct search") {
  const NilpotentAlgebra h = build_free_nilpotent(2, 2);
  const Theorem2Experiment t2 = theorem2_lifted_threshold(h, top_unit(h), 2, {0.4, 0.8});
  const ReachExperiment l1 = lemma1_threshold(h, top_unit(h), {0.4, 0.8});
  for (std::size_t i = 0; i < 2; ++i) CHECK(t2.rows[i].n == l1.rows[i].n_hi);
}

TEST_CASE("closed curves") {
  const NilpotentAlgebra h = build_free_nilpotent(2, 2);
  const QVec x = top_unit(h);
  SUBCASE("evident case") {
    const ClosedCurve c = theorem3_closed_curve(h, x, 2, 1.5);
    CHECK(c.evident_case);
    CHECK(c.steps.size() == 2);
    CHECK(c.closed);
    CHECK(c.max_deviation < 1.5);
  }
  SUBCASE("general case") {
    const ClosedCurve c = theorem3_closed_curve(h, x, 2, 0.25);
    CHECK_FALSE(c.evident_case);
    CHECK(c.closed);
    CHECK(c.max_deviation < 0.25);
    double len = 0;
    for (const auto& s : c.steps) len += norm(s);
    CHECK(len == doctest::Approx(c.length).epsilon(1e-12));
  }
}

TEST_CASE("attainable clouds") {
  const NilpotentAlgebra h = build_free_nilpotent(2, 2);
  SUBCASE("single ray") {
    const Cone ray = Cone::polyhedral(3, {{1, 0, 0}});
    const AttainableCloud c = attainable_sample(h, ray, 4, 2, 50, 1);
    for (const auto& p : c.points) {
      CHECK(p.x[0] >= 0);
      CHECK(std::abs(p.x[1]) <= 1e-12);
      CHECK(std::abs(p.x[2]) <= 1e-12);
    }
  }
  SUBCASE("whole space covers the box") {
    const AttainableCloud c = attainable_sample(h, Cone::whole_space(3), 8, 4, 20000, 2);
    CHECK(grid_coverage(c, 1.0, 4).fraction >= 0.95);
    CHECK(c.max_cone_distance <= 1e-10);
  }
  SUBCASE("cone inside the halfspace keeps chi nonnegative") {
    const Theorem1Example ex = theorem1_example(3.0);
    const SemidirectGroup g(ex.algebra, ex.derivation);
    const AttainableCloud c = attainable_sample(ex.algebra, ex.cone, 6, 2, 300, 3, &g);
    CHECK(c.min_chi >= -1e-9);
    CHECK(c.max_cone_distance <= 1e-10);
  }
}

TEST_CASE("halfspace demonstration: the contact-2 control is rejected by name") {
  const Theorem1Example ex = theorem1_example(2.0);
  const SemidirectGroup g(ex.algebra, ex.derivation);
  const Theorem1Report rep = theorem1_demonstration(g, ex.cone, ex.p, ex.v);
  CHECK_FALSE(rep.hypotheses_hold);
  REQUIRE(rep.failed.size() == 1);
  CHECK(rep.failed.front() == "degree_of_contact");
  CHECK(rep.points.empty());
}

TEST_CASE("halfspace demonstration: small grid with the cubic cone") {
  const Theorem1Example ex = theorem1_example(3.0);
  const SemidirectGroup g(ex.algebra, ex.derivation);
  Theorem1Options o;
  o.grid = 3;
  o.shell_grid = 2;
  const Theorem1Report rep = theorem1_demonstration(g, ex.cone, ex.p, ex.v, o);
  CHECK(rep.hypotheses_hold);
  CHECK(rep.reached == rep.points.size());
  CHECK(rep.negative_chi == 0);
  // the identity is reached by the empty word
  bool saw_identity = false;
  for (const auto& p : rep.points)
    if (p.target_t == 0 && norm(p.target_x) == 0) {
      saw_identity = true;
      CHECK(p.distance == 0);
      CHECK(p.steps == 0);
    }
  CHECK(saw_identity);
}
