// Acceptance run: one PASS/FAIL line per criterion with its measured numbers
// and wall time against the runtime limit. Exit status is nonzero on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nilcc/reachability.hpp"
#include "oracles/tensor_series.hpp"
#include "oracles/witt.hpp"
#include "support.hpp"

using namespace nilcc;
using testing_support::random_qvec;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int id, const std::string& title, double limit_s, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.require(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(secs < limit_s, "runtime");
  if (!o.pass) ++failures;
  std::printf("%s criterion %d: %s (%.1f s / %.0f s)%s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), secs, limit_s,
              o.detail.str().c_str());
  std::fflush(stdout);
}

const std::vector<std::pair<int, int>> kSuiteAlgebras{{2, 2}, {2, 3}, {2, 4}, {3, 2}};

QVec jacobi(const NilpotentAlgebra& a, const QVec& x, const QVec& y, const QVec& z,
            QVec (*br)(const NilpotentAlgebra&, const QVec&, const QVec&)) {
  return add(add(br(a, x, br(a, y, z)), br(a, y, br(a, z, x))), br(a, z, br(a, x, y)));
}

QVec plain_bracket(const NilpotentAlgebra& a, const QVec& x, const QVec& y) { return bracket(a, x, y); }
QVec asym_bracket(const NilpotentAlgebra& a, const QVec& x, const QVec& y) { return asymptotic_bracket(a, x, y); }

/// Every bracket of basis vectors of layers k and l lies in N^{k+l}.
bool filtration_ok(const NilpotentAlgebra& a, QVec (*br)(const NilpotentAlgebra&, const QVec&, const QVec&)) {
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) {
      const QVec b = br(a, unit<Rational>(a.dim(), i), unit<Rational>(a.dim(), j));
      for (std::size_t m = 0; m < a.dim(); ++m)
        if (b[m] != 0 && a.layer(m) < a.layer(i) + a.layer(j)) return false;
    }
  return true;
}

oracle::Series series_of(const AssocPoly& p) {
  oracle::Series s;
  for (const auto& [w, c] : p.terms())
    if (c != 0) s[w] = c;
  return s;
}

DVec random_dvec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1, 1);
  DVec v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

QVec top_unit(const NilpotentAlgebra& a) {
  QVec z = zeros<Rational>(a.dim());
  z[a.dim() - 1] = 1;
  return z;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(lo * std::pow(hi / lo, double(i) / (n - 1)));
  return g;
}

bool certificates_exact(const NilpotentAlgebra& a, const Factorization& f) {
  if (f.factors.size() != f.certificates.size()) return false;
  const QVec back = neg(f.center);
  for (std::size_t i = 0; i < f.factors.size(); ++i)
    if (endpoint(a, f.certificates[i]) != bch_product(a, back, f.factors[i]) || !is_horizontal(a, f.certificates[i]))
      return false;
  return true;
}

}  // namespace

int main() {
  criterion(1, "exact algebra suite", 10, [](Outcome& o) {
    std::mt19937_64 rng(101);
    for (auto [l, d] : kSuiteAlgebras) {
      const NilpotentAlgebra f = build_free_nilpotent(l, d);
      const std::string tag = "free(" + std::to_string(l) + "," + std::to_string(d) + ")";
      bool anti = true, jac = true, dims = static_cast<long>(f.dim()) == oracle::free_dim(l, d);
      for (int k = 1; k <= d; ++k)
        dims = dims && static_cast<long>(f.layer_indices(k).size()) == oracle::free_layer_dim(l, k);
      for (std::size_t i = 0; i < f.dim(); ++i)
        for (std::size_t j = 0; j < f.dim(); ++j) {
          const QVec ei = unit<Rational>(f.dim(), i), ej = unit<Rational>(f.dim(), j);
          anti = anti && bracket(f, ei, ej) == neg(bracket(f, ej, ei));
          for (std::size_t k = 0; k < f.dim(); ++k)
            jac = jac && is_zero(jacobi(f, ei, ej, unit<Rational>(f.dim(), k), plain_bracket));
        }
      for (int it = 0; it < 20; ++it) {
        const QVec x = random_qvec(rng, f.dim()), y = random_qvec(rng, f.dim()), z = random_qvec(rng, f.dim());
        anti = anti && bracket(f, x, y) == neg(bracket(f, y, x));
        jac = jac && is_zero(jacobi(f, x, y, z, plain_bracket));
      }
      o.require(anti, tag + " antisymmetry");
      o.require(jac, tag + " Jacobi");
      o.require(filtration_ok(f, plain_bracket), tag + " filtration");
      o.require(dims, tag + " Witt dimensions");
      o.detail << " " << tag << " dim " << f.dim();
    }
  });

  criterion(2, "exact group suite", 60, [](Outcome& o) {
    std::mt19937_64 rng(102);
    for (auto [l, d] : kSuiteAlgebras) {
      const NilpotentAlgebra f = build_free_nilpotent(l, d);
      const QVec e = zeros<Rational>(f.dim());
      int bad = 0, oracle_bad = 0;
      for (int it = 0; it < 100; ++it) {
        const QVec x = random_qvec(rng, f.dim()), y = random_qvec(rng, f.dim()), z = random_qvec(rng, f.dim());
        if (bch_product(f, bch_product(f, x, y), z) != bch_product(f, x, bch_product(f, y, z))) ++bad;
        if (bch_product(f, x, e) != x || bch_product(f, e, x) != x) ++bad;
        if (!is_zero(bch_product(f, x, group_inverse(f, x))) || !is_zero(bch_product(f, group_inverse(f, x), x))) ++bad;
      }
      for (int it = 0; it < 50; ++it) {
        const QVec x = random_qvec(rng, f.dim()), y = random_qvec(rng, f.dim());
        const auto expected = oracle::bch(series_of(tensor_image(f, x)), series_of(tensor_image(f, y)), d);
        if (series_of(tensor_image(f, bch_product(f, x, y))) != expected) ++oracle_bad;
      }
      const std::string tag = "free(" + std::to_string(l) + "," + std::to_string(d) + ")";
      o.require(bad == 0, tag + " group axioms");
      o.require(oracle_bad == 0, tag + " tensor oracle");
    }
    o.detail << " 100 triples and 50 oracle pairs per algebra";
  });

  criterion(3, "dilations and the reflection are automorphisms", 10, [](Outcome& o) {
    std::mt19937_64 rng(103);
    int bad = 0, checks = 0;
    for (auto [l, d] : kSuiteAlgebras) {
      const NilpotentAlgebra f = build_free_nilpotent(l, d);
      for (int it = 0; it < 20; ++it) {
        const QVec x = random_qvec(rng, f.dim()), y = random_qvec(rng, f.dim());
        for (const Rational& t : {Rational(1, 2), Rational(2), Rational(3)}) {
          ++checks;
          if (dilation(f, t, bch_product(f, x, y)) != bch_product(f, dilation(f, t, x), dilation(f, t, y))) ++bad;
        }
        ++checks;
        if (delta_minus_one(f, bch_product(f, x, y)) != bch_product(f, delta_minus_one(f, x), delta_minus_one(f, y)))
          ++bad;
      }
    }
    o.require(bad == 0, "automorphism identity");
    o.detail << " " << checks << " exact checks";
  });

  criterion(4, "asymptotic structure", 60, [](Outcome& o) {
    std::mt19937_64 rng(104);
    const NilpotentAlgebra n = testing_support::nongraded_quotient();
    o.require(!n.is_graded(), "sample quotient should be non-graded");
    bool jac = true;
    for (std::size_t i = 0; i < n.dim(); ++i)
      for (std::size_t j = 0; j < n.dim(); ++j)
        for (std::size_t k = 0; k < n.dim(); ++k)
          jac = jac && is_zero(jacobi(n, unit<Rational>(n.dim(), i), unit<Rational>(n.dim(), j),
                                      unit<Rational>(n.dim(), k), asym_bracket));
    o.require(jac, "asymptotic Jacobi");
    o.require(filtration_ok(n, asym_bracket), "asymptotic filtration");
    const QVec x = random_qvec(rng, n.dim()), y = random_qvec(rng, n.dim());
    std::vector<double> ts, alpha;
    for (int e = 0; e <= 6; ++e) {
      const Rational t = exact_rational(std::round(std::pow(10.0, 1 + 0.5 * e)));
      ts.push_back(t.get_d());
      alpha.push_back(norm(alpha_residual(n, t, x, y)));
    }
    const double slope = fit_loglog(ts, alpha).slope;
    o.require(std::abs(slope + 1) <= 0.1, "residual slope");
    std::vector<std::pair<QVec, QVec>> pairs;
    for (int i = 0; i < 20; ++i) pairs.emplace_back(random_qvec(rng, n.dim()), random_qvec(rng, n.dim()));
    const BetaCertificate c = certify_beta_constant(n, pairs, {Rational(10), Rational(100), Rational(1000), Rational(10000)});
    o.require(c.finite && std::isfinite(c.constant), "finite A");
    o.detail << " slope " << slope << ", A " << c.constant;
  });

  criterion(5, "CC metric suite", 300, [](Outcome& o) {
    std::mt19937_64 rng(105);
    int layer1_bad = 0;
    for (auto [l, d] : kSuiteAlgebras) {
      const NilpotentAlgebra f = build_free_nilpotent(l, d);
      const CcEstimator est(f);
      for (int it = 0; it < 5; ++it) {
        DVec x(f.dim(), 0.0);
        for (std::size_t i : f.layer_indices(1)) x[i] = random_dvec(rng, 1)[0];
        const DistanceEstimate e = est.upper(x);
        if (e.upper != e.lower) ++layer1_bad;
      }
    }
    o.require(layer1_bad == 0, "layer-1 upper = lower");
    const NilpotentAlgebra h = build_free_nilpotent(2, 2);
    const CcEstimator est(h);
    double worst = 0;
    for (int it = 0; it < 5; ++it)
      for (const auto& row : homogeneity_check(est, random_dvec(rng, 3), {2, 4, 8})) worst = std::max(worst, row.deviation);
    o.require(worst <= 0.05, "homogeneity");
    std::vector<std::pair<DVec, DVec>> pairs;
    for (int it = 0; it < 100; ++it) pairs.emplace_back(random_dvec(rng, 3), random_dvec(rng, 3));
    std::size_t held = 0;
    for (const auto& row : subadditivity_check(est, pairs, 1e-9)) held += row.holds;
    o.require(held == pairs.size(), "subadditivity");
    o.detail << " homogeneity deviation " << worst << ", subadditive " << held << "/100";
  });

  criterion(6, "threshold exponent recovery", 600, [](Outcome& o) {
    const std::vector<double> grid = log_grid(0.05, 0.5, 6);
    const NilpotentAlgebra h = build_free_nilpotent(2, 2), f = build_free_nilpotent(2, 3);
    for (auto [a, expected] : std::vector<std::pair<const NilpotentAlgebra*, double>>{{&h, 2.0}, {&f, 1.5}}) {
      const ReachExperiment ex = lemma1_threshold(*a, top_unit(*a), grid);
      bool witnessed = ex.complete;
      for (const auto& r : ex.rows) witnessed = witnessed && r.witnessed && r.closed && r.max_factor_distance < r.eps;
      o.require(ex.fitted && std::abs(ex.fit.slope - expected) <= 0.1 * expected, "slope");
      o.require(witnessed, "witnesses");
      o.detail << " step " << a->step() << ": slope " << ex.fit.slope << " (expected " << expected << ")";
    }
  });

  criterion(7, "reflection word is exactly closed in both parities", 60, [](Outcome& o) {
    // even step: Heisenberg, three first-layer pieces cancelling x three times
    const NilpotentAlgebra h = build_free_nilpotent(2, 2);
    const QVec x{Rational(1, 4), 0, 0};
    std::vector<QWord> pieces;
    for (const QVec& dir : {QVec{Rational(-1, 4), Rational(1, 8), 0}, QVec{Rational(-1, 4), Rational(-1, 8), 0},
                            QVec{Rational(-1, 4), 0, 0}})
      pieces.push_back(QWord{{{dir, Rational(1)}}, "horizontal"});
    double eps = 0;
    for (const auto& p : pieces) eps = std::max(eps, word_length(p));
    const Factorization even = lemma2_reflection_word(h, x, pieces);
    o.require(is_zero(product_of(h, even.factors)), "even product");
    o.require(even.max_certificate_length <= 2 * eps, "even factors within 2 eps");
    o.require(certificates_exact(h, even), "even certificates");
    // odd step: free(2,3), pieces built in the quotient by the top layer
    const NilpotentAlgebra f = build_free_nilpotent(2, 3);
    QVec xf = zeros<Rational>(f.dim());
    xf[2] = 1;
    const double eps_odd = 0.8;
    const auto odd = corollary2_factorization(f, xf, eps_odd);
    o.require(odd.has_value(), "odd factorization");
    if (odd) {
      o.require(is_zero(product_of(f, odd->factors)), "odd product");
      o.require(odd->max_certificate_length <= 2 * eps_odd, "odd factors within 2 eps");
      o.require(certificates_exact(f, *odd), "odd certificates");
      o.detail << " odd: " << odd->factors.size() << " factors, max distance " << odd->max_certificate_length;
    }
    o.detail << "; even: " << even.factors.size() << " factors, max distance " << even.max_certificate_length
             << " (2 eps = " << 2 * eps << ")";
  });

  criterion(8, "closed curves: length exponent", 600, [](Outcome& o) {
    const std::vector<double> grid = log_grid(0.05, 0.5, 6);
    const NilpotentAlgebra h = build_free_nilpotent(2, 2), f = build_free_nilpotent(2, 3);
    QVec xf = zeros<Rational>(f.dim());
    xf[2] = 1;
    for (auto [a, x] : std::vector<std::pair<const NilpotentAlgebra*, QVec>>{{&h, top_unit(h)}, {&f, xf}}) {
      const Theorem3Report rep = theorem3_experiment(*a, x, 2, grid);
      bool closed = true;
      for (const auto& [e, c] : rep.curves) closed = closed && c.closed && c.max_deviation < e;
      o.require(closed, "closed");
      o.require(rep.fitted && std::abs(rep.fit.slope - 2.0) <= 0.15 * 2.0, "slope");
      o.detail << " (k,d)=(2," << a->step() << "): slope " << rep.fit.slope << ", P " << rep.empirical_P;
    }
  });

  criterion(9, "degree of contact", 60, [](Outcome& o) {
    const Cone lorentz = Cone::lorentz({0, 0, 1}, 1.0);
    const ContactEstimate tangent = degree_of_contact(lorentz, {{1, 0, 1}, {0, 1, 0}}, {1, 0, 1});
    o.require(std::abs(tangent.exponent - 2) <= 0.05, "Lorentz tangent");
    const Cone quadrant = Cone::polyhedral(2, {{1, 0}, {0, 1}});
    const ContactEstimate transversal = degree_of_contact(quadrant, {{0, 1}}, {1, 0});
    o.require(std::abs(transversal.exponent - 1) <= 0.05, "transversal");
    o.detail << " Lorentz " << tangent.exponent << ", transversal " << transversal.exponent;
  });

  criterion(10, "halfspace demonstration", 900, [](Outcome& o) {
    const Theorem1Example ex = theorem1_example(3.0);
    const SemidirectGroup g(ex.algebra, ex.derivation);
    const Theorem1Report rep = theorem1_demonstration(g, ex.cone, ex.p, ex.v);
    o.require(rep.hypotheses_hold, "hypotheses");
    o.require(rep.contact_exponent > 2, "contact margin");
    std::size_t grid = 0, grid_reached = 0;
    for (const auto& p : rep.points)
      if (p.target_t == 0) {
        ++grid;
        grid_reached += p.reached && p.distance <= 1e-3;
      }
    o.require(grid == 125 && grid_reached == 125, "grid points reached");
    o.require(rep.negative_chi == 0, "chi");
    const Theorem1Example control = theorem1_example(2.0);
    const SemidirectGroup gc(control.algebra, control.derivation);
    const Theorem1Report rc = theorem1_demonstration(gc, control.cone, control.p, control.v);
    const bool named = !rc.hypotheses_hold && rc.failed == std::vector<std::string>{"degree_of_contact"};
    o.require(named, "control rejection");
    o.detail << " contact " << rep.contact_exponent << ", grid " << grid_reached << "/" << grid << ", all points "
             << rep.reached << "/" << rep.points.size() << ", worst " << rep.worst_distance << ", chi<0 "
             << rep.negative_chi << "; control rejected by " << (rc.failed.empty() ? "-" : rc.failed.front())
             << " (contact " << rc.contact_exponent << ")";
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
