#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "nilcc/cones.hpp"
#include "nilcc/lie_algebra.hpp"

using namespace nilcc;

namespace {

/// Projected gradient on min |sum c_i g_i - p|, c >= 0: an independent route
/// to the polyhedral distance.
double projected_gradient_distance(const std::vector<DVec>& gens, const DVec& p) {
  std::vector<double> c(gens.size(), 0.0);
  double lip = 0;
  for (const auto& g : gens) lip += dot_d(g, g);
  const double step = 1.0 / lip;
  DVec r = neg(p);
  for (int it = 0; it < 200000; ++it) {
    for (std::size_t i = 0; i < gens.size(); ++i) {
      const double grad = dot_d(gens[i], r);
      const double next = std::max(0.0, c[i] - step * grad);
      if (next != c[i]) {
        axpy(r, next - c[i], gens[i]);
        c[i] = next;
      }
    }
  }
  return norm(r);
}

/// Lorentz distance by a scan over the meridian half-plane through p.
double lorentz_scan_distance(const DVec& axis, double slope, const DVec& p) {
  const double u = dot_d(axis, p);
  DVec w = p;
  axpy(w, -u, axis);
  const double v = norm(w);
  if (u >= slope * v) return 0;
  double best = std::hypot(u, v);  // apex
  for (int i = 0; i <= 200000; ++i) {
    const double s = 10.0 * i / 200000;  // boundary generator (u, v) = (slope s, s)
    best = std::min(best, std::hypot(u - slope * s, v - s));
  }
  return best;
}

}  // namespace

TEST_CASE("NNLS satisfies the KKT conditions") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> g;
  for (int it = 0; it < 20; ++it) {
    std::vector<DVec> cols(5, DVec(4));
    for (auto& c : cols)
      for (auto& x : c) x = g(rng);
    DVec b(4);
    for (auto& x : b) x = g(rng);
    const NnlsResult r = nnls(cols, b);
    const DVec resid = sub(r.fitted, b);
    for (std::size_t i = 0; i < cols.size(); ++i) {
      CHECK(r.coefficients[i] >= 0);
      const double grad = dot_d(cols[i], resid);
      CHECK(grad >= -1e-9);
      if (r.coefficients[i] > 1e-12) CHECK(std::abs(grad) <= 1e-9);
    }
  }
}

TEST_CASE("polyhedral distance agrees with projected gradient") {
  const std::vector<DVec> gens{{1, 0, 1}, {0, 1, 1}, {-1, 0, 1}, {0, -1, 1}};
  const Cone c = Cone::polyhedral(3, gens);
  std::mt19937_64 rng(42);
  std::normal_distribution<double> g;
  for (int it = 0; it < 10; ++it) {
    const DVec p{g(rng), g(rng), g(rng)};
    CHECK(c.distance(p) == doctest::Approx(projected_gradient_distance(gens, p)).epsilon(1e-6));
  }
  CHECK(c.contains({0, 0, 1}));
  CHECK_FALSE(c.contains({0, 0, -1}));
  CHECK(c.interior({0, 0, 1}).inside);
  CHECK_FALSE(c.interior({1, 0, 1}).inside);
  CHECK(descriptions_agree(Cone::polyhedral(3, gens, {{1, 1, 1}, {1, -1, 1}, {-1, 1, 1}, {-1, -1, 1}}), 200, 3));
}

TEST_CASE("halfspace-only cones") {
  const Cone half = Cone::halfspaces(2, {{0, 1}});
  CHECK(half.distance({3, -2}) == doctest::Approx(2));
  CHECK(half.distance({3, 2}) == 0);
  const Cone all = Cone::whole_space(3);
  CHECK(all.distance({1, 2, 3}) == 0);
  CHECK(all.interior({0, 0, 0}).inside);
}

TEST_CASE("Lorentz distance matches a scan") {
  const DVec axis{0, 0, 1};
  const Cone c = Cone::lorentz(axis, 2.0);
  std::mt19937_64 rng(43);
  std::normal_distribution<double> g;
  for (int it = 0; it < 10; ++it) {
    const DVec p{g(rng), g(rng), g(rng)};
    CHECK(c.distance(p) == doctest::Approx(lorentz_scan_distance(axis, 2.0, p)).epsilon(1e-4));
  }
}

TEST_CASE("degree of contact") {
  SUBCASE("Lorentz cone against its tangent plane: 2") {
    const Cone c = Cone::lorentz({0, 0, 1}, 1.0);
    const DVec x{1, 0, 1};  // boundary ray
    const ContactEstimate e = degree_of_contact(c, {{1, 0, 1}, {0, 1, 0}}, x);
    CHECK(e.exponent == doctest::Approx(2).epsilon(0.025));
  }
  SUBCASE("transversal polyhedral crossing: 1") {
    const Cone c = Cone::halfspaces(2, {{0, 1}});
    const ContactEstimate e = degree_of_contact(c, {{0, 1}}, {1, 0});
    CHECK(e.exponent == doctest::Approx(1).epsilon(0.05));
  }
  SUBCASE("subspace inside the cone: distance vanishes") {
    const Cone c = Cone::halfspaces(2, {{0, 1}});
    const ContactEstimate e = degree_of_contact(c, {{1, 0}}, {1, 0});
    CHECK_FALSE(e.measurable);
  }
  SUBCASE("cubic power cone") {
    PowerProfile p;
    p.tau_index = 0;
    p.s_index = 3;
    p.y_indices = {1, 2};
    p.exponent = 3;
    p.coefficient = 1e-5;
    p.shear = 1;
    const Cone c = Cone::power(4, p);
    ContactOptions o;
    for (int i = 0; i < 16; ++i) o.radii.push_back(std::pow(10.0, -2.0 + 2.0 * i / 15.0));
    const ContactEstimate e = degree_of_contact(c, {{0, 1, 0, 0}, {0, 0, 1, 0}}, {0, 0, 0, 1}, o);
    CHECK(e.exponent == doctest::Approx(3).epsilon(0.02));
    CHECK(c.interior({1, 0, 0, 0}).inside);
    CHECK(c.contains({0, 0, 0, 1}));
    CHECK_FALSE(c.interior({0, 0, 0, 1}).inside);
  }
}

TEST_CASE("controllability criterion") {
  const NilpotentAlgebra h = build_free_nilpotent(2, 2);
  SUBCASE("cone containing the centre direction in its interior") {
    const Cone c = Cone::lorentz({0, 0, 1}, 1.0);
    CHECK(controllability_criterion(c, h).verdict == Controllability::controllable);
  }
  SUBCASE("cone in a halfspace bounded by the derived algebra") {
    const Cone c = Cone::halfspaces(3, {{1, 0, 0}});
    CHECK(controllability_criterion(c, h).verdict == Controllability::not_controllable_by_criterion);
  }
  SUBCASE("polyhedral cone around e3") {
    const Cone c = Cone::polyhedral(3, {{1, 0, 1}, {0, 1, 1}, {-1, 0, 1}, {0, -1, 1}});
    CHECK(controllability_criterion(c, h).verdict == Controllability::controllable);
  }
}

TEST_CASE("membership boost and phi") {
  const Cone c = Cone::lorentz({0, 0, 1}, 1.0);
  const auto b = membership_boost(c, {1, 0, 0}, {0, 0, 1});
  REQUIRE(b);
  CHECK(*b == doctest::Approx(1).epsilon(1e-9));
  const PhiReport r = phi_margin(c, {1, 0, 1}, {0, 0, 1}, {{1, 0, 1}, {0, 1, 0}}, {0.01, 0.03, 0.1});
  CHECK(r.monotone);
  CHECK_FALSE(r.identically_zero);
}
