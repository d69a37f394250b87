#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nilcc/cc_metric.hpp"
#include "support.hpp"

using namespace nilcc;

namespace {

DVec random_dvec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1, 1);
  DVec v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("first-layer targets are reached by a straight segment") {
  const NilpotentAlgebra h = build_free_nilpotent(2, 2);
  const CcEstimator est(h);
  const DistanceEstimate e = est.upper({3, 4, 0});
  CHECK(e.upper == 5);
  CHECK(est.lower({3, 4, 0}) == 5);
  const DistanceEstimate q = est.upper_exact(QVec{3, 4, 0});
  REQUIRE(q.exact_witness);
  CHECK(endpoint(h, *q.exact_witness) == QVec{3, 4, 0});
}

TEST_CASE("Heisenberg centre: sandwich around the optimal value") {
  const NilpotentAlgebra h = build_free_nilpotent(2, 2);
  const CcEstimator est(h);
  const DistanceEstimate e = est.upper({0, 0, 1});
  // the true value is sqrt(4 pi) ~ 3.5449 (a circle enclosing area 1)
  CHECK(e.lower == doctest::Approx(std::sqrt(4 * M_PI)));
  CHECK(e.upper >= e.lower);
  CHECK(e.upper <= 4 + 1e-9);
  CHECK(e.reached);
  CHECK(norm(sub(endpoint(h, e.witness), DVec{0, 0, 1})) <= 1e-6);
}

TEST_CASE("exact witnesses hit rational targets exactly") {
  std::mt19937_64 rng(31);
  for (auto [l, d] : std::vector<std::pair<int, int>>{{2, 2}, {2, 3}, {3, 2}}) {
    const NilpotentAlgebra f = build_free_nilpotent(l, d);
    CcOptions o;
    o.word_cap = 200;
    const CcEstimator est(f, o);
    for (int it = 0; it < 3; ++it) {
      const QVec x = testing_support::random_qvec(rng, f.dim(), 3, 2);
      const DistanceEstimate e = est.upper_exact(x);
      REQUIRE(e.exact_witness);
      CHECK(endpoint(f, *e.exact_witness) == x);
      CHECK(is_horizontal(f, *e.exact_witness));
      CHECK(e.lower <= e.upper);
    }
  }
}

TEST_CASE("homogeneity, reflection invariance and subadditivity") {
  const NilpotentAlgebra h = build_free_nilpotent(2, 2);
  const CcEstimator est(h);
  std::mt19937_64 rng(32);
  for (int it = 0; it < 3; ++it) {
    for (const auto& row : homogeneity_check(est, random_dvec(rng, 3), {2, 4, 8})) CHECK_FALSE(row.flagged);
  }
  std::vector<DVec> sample;
  for (int it = 0; it < 5; ++it) sample.push_back(random_dvec(rng, 3));
  for (const auto& row : isometry_check_delta_minus_one(est, sample)) CHECK_FALSE(row.flagged);
  std::vector<std::pair<DVec, DVec>> pairs;
  for (int it = 0; it < 10; ++it) pairs.emplace_back(random_dvec(rng, 3), random_dvec(rng, 3));
  for (const auto& row : subadditivity_check(est, pairs)) CHECK(row.holds);
}

TEST_CASE("word utilities preserve endpoints") {
  const NilpotentAlgebra f = build_free_nilpotent(2, 3);
  QWord w;
  w.steps = {{QVec{1, 0, 0, 0, 0}, Rational(1, 2)},
             {QVec{1, 0, 0, 0, 0}, Rational(1, 3)},
             {QVec{0, 3, 0, 0, 0}, Rational(1)},
             {QVec{-1, 0, 0, 0, 0}, Rational(1)},
             {QVec{0, 0, 0, 0, 0}, Rational(2)}};
  const QVec end = endpoint(f, w);
  CHECK(endpoint(f, merge_steps(w)) == end);
  CHECK(merge_steps(w).size() == 3);
  CHECK(is_zero(endpoint(f, concat(w, inverse_word(w)))));
  const auto pieces = split_by_length(w, 4);
  REQUIRE(pieces.size() == 4);
  QVec acc = zeros<Rational>(f.dim());
  for (const auto& p : pieces) {
    acc = bch_product(f, acc, endpoint(f, p));
    CHECK(word_length(p) <= word_length(w) / 4 + 1e-12);
  }
  CHECK(acc == end);
  CHECK(word_length(w) == doctest::Approx(1.0 / 2 + 1.0 / 3 + 3 + 1));
}

TEST_CASE("left-invariant distance") {
  const NilpotentAlgebra h = build_free_nilpotent(2, 2);
  const CcEstimator est(h);
  const DVec x{0.3, -0.2, 0.1}, y{0.5, 0.4, -0.3};
  const DistanceEstimate d = est.distance(x, y);
  const DistanceEstimate direct = est.upper(bch_product(h, neg(x), y));
  CHECK(d.upper == doctest::Approx(direct.upper));
}
