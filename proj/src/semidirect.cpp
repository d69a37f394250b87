#include "nilcc/semidirect.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <random>

namespace nilcc {

namespace {

QMatrix multiply(const QMatrix& a, const QMatrix& b) {
  const std::size_t n = a.size();
  QMatrix r(n, QVec(n, Rational(0)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      if (sgn(a[i][k]) == 0) continue;
      for (std::size_t j = 0; j < n; ++j)
        if (sgn(b[k][j]) != 0) r[i][j] += a[i][k] * b[k][j];
    }
  return r;
}

bool is_zero_matrix(const QMatrix& m) {
  for (const auto& row : m)
    if (!is_zero(row)) return false;
  return true;
}

template <class S>
Vec<S> mat_apply(const QMatrix& m, const Vec<S>& x) {
  Vec<S> r(m.size(), S(0));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j)
      if (sgn(m[i][j]) != 0 && !ScalarTraits<S>::is_zero(x[j])) r[i] += from_rational<S>(m[i][j]) * x[j];
  return r;
}

DVec apply_d(const Eigen::MatrixXd& m, const DVec& x) {
  Eigen::VectorXd v = m * Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  return DVec(v.data(), v.data() + v.size());
}

}  // namespace

SemidirectGroup::SemidirectGroup(const NilpotentAlgebra& base, QMatrix derivation)
    : base_(&base), derivation_(std::move(derivation)) {
  const std::size_t n = base.dim();
  if (derivation_.size() != n) throw Error("algebra_mismatch", "derivation matrix has the wrong size");
  for (const auto& row : derivation_)
    if (row.size() != n) throw Error("algebra_mismatch", "derivation matrix has the wrong size");
  derivation_d_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      derivation_d_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = derivation_[i][j].get_d();
  // D^k / k!, stopping at the first zero power
  QMatrix id(n, QVec(n, Rational(0)));
  for (std::size_t i = 0; i < n; ++i) id[i][i] = 1;
  powers_.push_back(id);
  QMatrix p = derivation_;
  for (std::size_t k = 1; k <= n; ++k) {
    if (is_zero_matrix(p)) {
      nilpotent_ = true;
      break;
    }
    QMatrix scaled = p;
    mpz_class f = 1;
    for (std::size_t i = 2; i <= k; ++i) f *= static_cast<unsigned long>(i);
    for (auto& row : scaled)
      for (auto& c : row) c /= Rational(f);
    powers_.push_back(scaled);
    p = multiply(p, derivation_);
  }
  if (!nilpotent_ && is_zero_matrix(p)) nilpotent_ = true;
  if (!nilpotent_) powers_.resize(1);
}

DerivationReport SemidirectGroup::check_derivation() const {
  const auto& a = *base_;
  const std::size_t n = a.dim();
  DerivationReport rep;
  for (std::size_t i = 0; i < n; ++i) {
    const QVec bi = unit<Rational>(n, i);
    const QVec dbi = mat_apply(derivation_, bi);
    for (std::size_t j = i + 1; j < n; ++j) {
      const QVec bj = unit<Rational>(n, j);
      const QVec lhs = mat_apply(derivation_, bracket(a, bi, bj));
      const QVec rhs = add(bracket(a, dbi, bj), bracket(a, bi, mat_apply(derivation_, bj)));
      if (lhs != rhs) {
        rep.derivation = false;
        rep.violations.push_back("derivation rule fails on (" + a.label(i) + ", " + a.label(j) + ")");
      }
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (sgn(dbi[k]) == 0) continue;
      if (a.layer(i) == 1 && a.layer(k) != 1) {
        rep.layer1_invariant = false;
        rep.violations.push_back("first layer not invariant: D " + a.label(i) + " leaves it");
      }
      if (a.layer(k) < a.layer(i)) {
        rep.preserves_filtration = false;
        rep.violations.push_back("filtration not preserved at " + a.label(i));
      }
    }
  }
  return rep;
}

template <class S>
Vec<S> SemidirectGroup::apply_derivation(const Vec<S>& x) const {
  base_->check(x);
  return mat_apply(derivation_, x);
}

Eigen::MatrixXd SemidirectGroup::flow_matrix(double t) const {
  if (nilpotent_) {
    const auto n = static_cast<Eigen::Index>(dim());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    double tk = 1;
    for (const auto& pk : powers_) {
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) += tk * pk[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get_d();
      tk *= t;
    }
    return m;
  }
  return (t * derivation_d_).exp();
}

QMatrix SemidirectGroup::flow_matrix_exact(const Rational& t) const {
  if (!nilpotent_) throw Error("domain", "exact flow needs a nilpotent action");
  const std::size_t n = dim();
  QMatrix m(n, QVec(n, Rational(0)));
  Rational tk = 1;
  for (const auto& pk : powers_) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m[i][j] += tk * pk[i][j];
    tk *= t;
  }
  return m;
}

template <class S>
Vec<S> SemidirectGroup::flow(const S& t, const Vec<S>& x) const {
  base_->check(x);
  if constexpr (ScalarTraits<S>::exact) {
    return mat_apply(flow_matrix_exact(t), x);
  } else {
    return apply_d(flow_matrix(t), x);
  }
}

double SemidirectGroup::automorphism_residual(double t, const std::vector<std::pair<DVec, DVec>>& pairs) const {
  const Eigen::MatrixXd m = flow_matrix(t);
  double worst = 0;
  for (const auto& [x, y] : pairs) {
    const DVec lhs = apply_d(m, bch_product(*base_, x, y));
    const DVec rhs = bch_product(*base_, apply_d(m, x), apply_d(m, y));
    worst = std::max(worst, norm(sub(lhs, rhs)));
  }
  return worst;
}

template <class S>
SdPoint<S> SemidirectGroup::product(const SdPoint<S>& p, const SdPoint<S>& q) const {
  const S minus_s = -q.t;
  return {p.t + q.t, bch_product(*base_, flow(minus_s, p.x), q.x)};
}

template <class S>
SdPoint<S> SemidirectGroup::inverse(const SdPoint<S>& p) const {
  return {-p.t, neg(flow(p.t, p.x))};
}

ConstantM SemidirectGroup::constant_M(double tolerance) const {
  ConstantM m;
  const double dnorm = derivation_d_.size() ? derivation_d_.operatorNorm() : 0.0;
  m.certified = std::exp(dnorm);
  auto norm_at = [&](double t) { return flow_matrix(t).operatorNorm(); };
  std::size_t points = 64;
  double previous = -1;
  while (true) {
    double best = 0;
    for (std::size_t i = 0; i <= points; ++i) {
      const double t = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(points);
      best = std::max(best, norm_at(t));
    }
    m.grid_value = best;
    m.grid_points = points + 1;
    if (previous >= 0 && std::fabs(best - previous) <= tolerance) break;
    if (points >= (1u << 16)) break;
    previous = best;
    points *= 2;
  }
  return m;
}

DSdPoint SemidirectGroup::exp_G(double tau, const DVec& xi, std::size_t panels) const {
  base_->check(xi);
  if (panels == 0) panels = 1;
  const auto& a = *base_;
  const double h = 1.0 / static_cast<double>(panels);
  const double c1 = 0.5 - std::sqrt(3.0) / 6, c2 = 0.5 + std::sqrt(3.0) / 6;
  const double w = std::sqrt(3.0) / 12;
  auto eta = [&](double s) { return apply_d(flow_matrix(-(1 - s) * tau), xi); };
  DVec y(a.dim(), 0.0);
  for (std::size_t k = 0; k < panels; ++k) {
    const double s0 = static_cast<double>(k) * h;
    const DVec e1 = eta(s0 + c1 * h), e2 = eta(s0 + c2 * h);
    DVec omega = scale(h / 2, add(e1, e2));
    axpy(omega, w * h * h, bracket(a, e1, e2));
    y = bch_product(a, y, omega);
  }
  return {tau, y};
}

template Vec<Rational> SemidirectGroup::apply_derivation(const Vec<Rational>&) const;
template Vec<double> SemidirectGroup::apply_derivation(const Vec<double>&) const;
template Vec<Rational> SemidirectGroup::flow(const Rational&, const Vec<Rational>&) const;
template Vec<double> SemidirectGroup::flow(const double&, const Vec<double>&) const;
template QSdPoint SemidirectGroup::product(const QSdPoint&, const QSdPoint&) const;
template DSdPoint SemidirectGroup::product(const DSdPoint&, const DSdPoint&) const;
template QSdPoint SemidirectGroup::inverse(const QSdPoint&) const;
template DSdPoint SemidirectGroup::inverse(const DSdPoint&) const;

Lemma4Report lemma4_inclusion_check(const SemidirectGroup& g, const DVec& q, double eps, double t, std::size_t n,
                                    std::size_t samples, unsigned seed) {
  const auto& a = g.base();
  a.check(q);
  Lemma4Report rep;
  auto fail = [&](std::string why) {
    rep.precondition_ok = false;
    rep.precondition_failure = std::move(why);
    return rep;
  };
  if (n == 0 || !(t >= 0) || static_cast<double>(n) * t >= 1) return fail("need n >= 1 and n t < 1");
  if (!(eps > 0)) return fail("need eps > 0");
  for (std::size_t i = 0; i < a.dim(); ++i)
    if (a.layer(i) != a.step() && q[i] != 0) return fail("q must lie in the top layer");
  if (norm(g.apply_derivation(q)) > 1e-12 * std::max(1.0, norm(q))) return fail("q must satisfy D q = 0");
  const DerivationReport dr = g.check_derivation();
  if (!dr.layer1_invariant) return fail("first layer must be invariant under D");

  const ConstantM M = g.constant_M();
  rep.allowed_length = M.certified * eps;
  const auto gens = a.layer_indices(1);
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  std::uniform_int_distribution<int> count(1, 4);
  for (std::size_t sample = 0; sample < samples; ++sample) {
    ++rep.samples;
    bool ok = true;
    std::vector<DVec> xs;
    std::vector<DSdPoint> factors;
    for (std::size_t k = 1; k <= n; ++k) {
      // x_k: endpoint of a random horizontal word of length <= eps
      DWord word;
      const int steps = count(rng);
      const double budget = eps * unif(rng);
      for (int s = 0; s < steps; ++s) {
        DVec dir(a.dim(), 0.0);
        for (auto gi : gens) dir[gi] = gauss(rng);
        word.steps.push_back({dir, 1.0});
      }
      const double len = word_length(word);
      for (auto& st : word.steps) st.duration = budget / len;
      const DVec xk = endpoint(a, word);
      xs.push_back(xk);
      const double shift = static_cast<double>(n - k) * t;
      const Eigen::MatrixXd A = g.flow_matrix(shift);
      DWord mapped;
      for (const auto& st : word.steps) mapped.steps.push_back({apply_d(A, st.direction), st.duration});
      const DVec yk = endpoint(a, mapped);
      const DVec expected = apply_d(A, xk);
      const double flen = word_length(mapped);
      rep.worst_factor_length = std::max(rep.worst_factor_length, flen);
      if (!is_horizontal(a, mapped) || flen > rep.allowed_length * (1 + 1e-12) ||
          norm(sub(yk, expected)) > 1e-9 * std::max(1.0, norm(expected))) {
        ok = false;
        rep.violations.push_back("factor " + std::to_string(k) + " of sample " + std::to_string(sample) +
                                 " leaves (t, q + M eps B)");
      }
      factors.push_back({t, bch_product(a, q, yk)});
    }
    DSdPoint prod = g.identity<double>();
    for (const auto& f : factors) prod = g.product(prod, f);
    DVec rhs = scale(static_cast<double>(n), q);
    for (const auto& x : xs) rhs = bch_product(a, rhs, x);
    const double err = std::fabs(prod.t - static_cast<double>(n) * t) + norm(sub(prod.x, rhs));
    rep.worst_product_error = std::max(rep.worst_product_error, err);
    if (err > 1e-9 * std::max(1.0, norm(rhs))) {
      ok = false;
      rep.violations.push_back("product mismatch in sample " + std::to_string(sample));
    }
    if (ok) ++rep.verified;
  }
  return rep;
}

}  // namespace nilcc
