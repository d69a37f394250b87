#include "nilcc/reachability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <future>
#include <map>
#include <numeric>
#include <random>
#include <thread>

#include "nilcc/linalg.hpp"

namespace nilcc {

namespace {

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(count, std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < workers; ++w)
    jobs.push_back(std::async(std::launch::async, [&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    }));
  for (auto& j : jobs) j.get();
}

bool only_layer(const NilpotentAlgebra& a, const QVec& x, int k) {
  for (std::size_t i = 0; i < a.dim(); ++i)
    if (a.layer(i) != k && sgn(x[i]) != 0) return false;
  return true;
}

void require_top_layer(const NilpotentAlgebra& a, const QVec& z) {
  a.check(z);
  if (!a.is_graded()) throw Error("precondition", "threshold search needs a graded algebra");
  if (is_zero(z) || !only_layer(a, z, a.step()))
    throw Error("precondition", "target must be a nonzero element of the top layer");
}

template <class S>
ControlWord<S> dilate_word(const ControlWord<S>& w, const S& t) {
  ControlWord<S> r = w;
  for (auto& s : r.steps) s.duration *= t;
  return r;
}

ControlWord<Rational> reflect_word(const QWord& w) {
  QWord r = w;
  for (auto& s : r.steps) s.direction = neg(s.direction);
  return r;
}

/// Exact word reaching `target`: the float word converted exactly and closed
/// by an exact steering correction.
QWord exactify(const CcEstimator& est, const DWord& w, const QVec& target) {
  const auto& a = est.algebra();
  QWord exact = to_exact(w);
  const QVec miss = bch_product(a, neg(endpoint(a, exact)), target);
  if (!is_zero(miss)) {
    auto fix = est.steer_exact(miss);
    if (!fix) throw Error("precondition", "first layer does not generate the algebra");
    exact = concat(exact, *fix);
  }
  exact = merge_steps(exact);
  if (endpoint(a, exact) != target) throw Error("internal", "exact witness misses its target");
  return exact;
}

/// Splits a word for (center^{-1})^n-type targets into n certificates and
/// builds the factors center * endpoint(piece). Fails if a piece reaches eps.
std::optional<Factorization> factor_pieces(const NilpotentAlgebra& a, const QVec& center, const QWord& word,
                                           long n, double eps) {
  Factorization f;
  f.center = center;
  auto pieces = split_by_length(word, static_cast<std::size_t>(n));
  f.factors.reserve(pieces.size());
  for (auto& piece : pieces) {
    const double len = word_length(piece);
    if (!(len < eps)) return std::nullopt;
    f.max_certificate_length = std::max(f.max_certificate_length, len);
    f.factors.push_back(bch_product(a, center, endpoint(a, piece)));
    f.certificates.push_back(std::move(piece));
  }
  return f;
}

bool closes(const NilpotentAlgebra& a, const std::vector<QVec>& factors) {
  return factors.empty() || is_zero(product_of(a, factors));
}

struct Search {
  long n_lo = 1;
  long n_hi = 0;
  bool incomplete = false;
  std::optional<Factorization> witness;
  double witness_length = 0;
};

/// Smallest n whose predicate holds, by doubling then bisection. Returns 0 if
/// none up to max_n.
long first_true(long max_n, const std::function<bool(long)>& pred) {
  long hi = 1;
  while (!pred(hi)) {
    if (hi >= max_n) return 0;
    hi = std::min(max_n, hi * 2);
  }
  long lo = hi / 2;  // pred(lo) false or lo == 0
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    (pred(mid) ? hi : lo) = mid;
  }
  return hi;
}

/// e in B(z, eps)^n iff kappa(e, (nz)^{-1}) < n eps; both sides of the
/// sandwich are searched, and the upper side is witnessed exactly.
Search threshold_search(const CcEstimator& est, const QVec& z, double eps, long max_n, const DWord& base) {
  const auto& a = est.algebra();
  const double d = a.step();
  const DVec zd = to_double(z);
  Search out;
  out.n_lo = first_true(max_n, [&](long n) {
    return est.lower(scale(-static_cast<double>(n), zd)) < static_cast<double>(n) * eps;
  });
  std::map<long, DWord> words;
  auto candidate = [&](long n) {
    const DVec target = scale(-static_cast<double>(n), zd);
    const DWord seed = dilate_word(base, std::pow(static_cast<double>(n), 1.0 / d));
    DistanceEstimate e = est.upper(target, {seed});
    if (!e.reached || !(e.upper < static_cast<double>(n) * eps)) return false;
    words[n] = e.witness;
    return true;
  };
  long n = first_true(max_n, candidate);
  if (n == 0) {
    out.incomplete = true;
    return out;
  }
  // The exact correction can lengthen the float word slightly; move up until
  // the exact witness fits.
  for (int tries = 0; tries < 64 && n <= max_n; ++tries, ++n) {
    if (!words.count(n) && !candidate(n)) continue;
    const QVec target = scale(Rational(-n), z);
    const QWord exact = exactify(est, words[n], target);
    const double len = word_length(exact);
    if (!(len < static_cast<double>(n) * eps)) continue;
    auto f = factor_pieces(a, z, exact, n, eps);
    if (!f) continue;
    f->closed = closes(a, f->factors);
    out.n_hi = n;
    out.witness = std::move(f);
    out.witness_length = len;
    out.n_lo = std::min(out.n_lo, n);
    return out;
  }
  out.incomplete = true;
  return out;
}

DWord base_word(const CcEstimator& est, const QVec& z, double* radius) {
  DistanceEstimate e = est.upper(neg(to_double(z)));
  if (!e.reached) throw Error("precondition", "no horizontal word reaches the target");
  if (radius) *radius = e.upper;
  return e.witness;
}

void finish_threshold_fit(ReachExperiment& ex) {
  std::vector<double> inv, mid;
  for (const auto& r : ex.rows)
    if (r.witnessed) {
      inv.push_back(1.0 / r.eps);
      mid.push_back(r.n_mid);
    }
  if (inv.size() >= 2) {
    ex.fit = fit_loglog(inv, mid);
    ex.fitted = true;
  }
  auto sorted = ex.rows;
  std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.eps < y.eps; });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].witnessed && sorted[i - 1].witnessed && sorted[i].n_hi > sorted[i - 1].n_hi) ex.monotone = false;
}

}  // namespace

std::optional<Factorization> lemma1_factorization(const CcEstimator& est, const QVec& z, double eps, long n) {
  const auto& a = est.algebra();
  require_top_layer(a, z);
  if (n < 1) throw Error("precondition", "n must be positive");
  const QVec target = scale(Rational(-n), z);
  const DWord w = est.upper(to_double(target)).witness;
  const QWord exact = exactify(est, w, target);
  if (!(word_length(exact) < static_cast<double>(n) * eps)) return std::nullopt;
  auto f = factor_pieces(a, z, exact, n, eps);
  if (f) f->closed = closes(a, f->factors);
  return f;
}

ReachExperiment lemma1_threshold(const NilpotentAlgebra& a, const QVec& z, const std::vector<double>& eps_grid,
                                 const ReachOptions& options, bool keep_witnesses) {
  require_top_layer(a, z);
  if (a.step() < 2) throw Error("precondition", "threshold search needs step >= 2");
  const CcEstimator est(a, options.cc);
  ReachExperiment ex;
  ex.name = "lemma1";
  const double d = a.step();
  ex.exponent = d / (d - 1);
  const DWord base = base_word(est, z, &ex.radius);
  ex.rows.resize(eps_grid.size());
  std::vector<std::optional<Factorization>> kept(eps_grid.size());
  parallel_for(eps_grid.size(), [&](std::size_t i) {
    const double eps = eps_grid[i];
    if (!(eps > 0)) throw Error("domain", "eps must be positive");
    Search s = threshold_search(est, z, eps, options.max_n, base);
    ThresholdRow& row = ex.rows[i];
    row.eps = eps;
    row.n_lo = s.n_lo;
    row.n_hi = s.n_hi;
    row.incomplete = s.incomplete;
    if (s.witness) {
      row.witnessed = true;
      row.closed = s.witness->closed;
      row.max_factor_distance = s.witness->max_certificate_length;
      row.witness_length = s.witness_length;
      row.n_mid = 0.5 * static_cast<double>(row.n_lo + row.n_hi);
      if (keep_witnesses) kept[i] = std::move(s.witness);
    }
  });
  for (std::size_t i = 0; i < ex.rows.size(); ++i) {
    const auto& r = ex.rows[i];
    if (r.incomplete) ex.complete = false;
    if (r.witnessed)
      ex.empirical_Q = std::max(ex.empirical_Q, static_cast<double>(r.n_hi) * std::pow(r.eps / ex.radius, ex.exponent));
    if (kept[i]) ex.witnesses.push_back(std::move(*kept[i]));
  }
  finish_threshold_fit(ex);
  return ex;
}

namespace {

/// Random horizontal word of total length below `length` with dyadic data.
QWord random_short_word(const NilpotentAlgebra& a, double length, std::size_t steps, std::mt19937_64& rng) {
  QWord w;
  if (!(length > 0)) return w;
  const auto gens = a.layer_indices(1);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  std::vector<double> weights(steps);
  for (auto& x : weights) x = unif(rng);
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const double budget = 0.95 * length * unif(rng);
  for (std::size_t s = 0; s < steps; ++s) {
    QVec dir = zeros<Rational>(a.dim());
    for (auto g : gens) dir[g] = dyadic_approx(gauss(rng), 12);
    const double n = norm(dir);
    if (n == 0) continue;
    // duration * |dir| stays below the step's share of the budget
    w.steps.push_back({dir, dyadic_approx(0.999 * budget * weights[s] / total / n, 30)});
  }
  return w;
}

}  // namespace

BallInclusionReport lemma1_ball_inclusion(const NilpotentAlgebra& a, const QVec& z, double eps, double s, long n,
                                          std::size_t samples, unsigned seed, const ReachOptions& options) {
  require_top_layer(a, z);
  if (n < 1 || !(eps > 0) || s < 0) throw Error("domain", "need n >= 1, eps > 0, s >= 0");
  const CcEstimator est(a, options.cc);
  BallInclusionReport rep;
  const DWord base = base_word(est, z, &rep.radius);
  const double d = a.step();
  rep.hypothesis = std::pow(static_cast<double>(n), 1.0 / d) * rep.radius + s < static_cast<double>(n) * eps;
  if (!rep.hypothesis) {
    rep.verdict = "not implied";
    return rep;
  }
  // Word for (nz)^{-1}; a sample w is then factorized through z B(eps) by
  // cutting the word for (nz)^{-1} w into n pieces.
  const QVec back = scale(Rational(-n), z);
  const QWord to_back =
      exactify(est, dilate_word(base, std::pow(static_cast<double>(n), 1.0 / d)), back);
  std::mt19937_64 rng(seed);
  const std::size_t count = s > 0 ? samples : 1;
  for (std::size_t i = 0; i < count; ++i) {
    const QWord ws = random_short_word(a, s, 3, rng);
    const QVec w = endpoint(a, ws);
    ++rep.samples;
    const QWord total = concat(to_back, ws);
    if (!(word_length(total) < static_cast<double>(n) * eps)) continue;
    auto f = factor_pieces(a, z, total, n, eps);
    if (!f) continue;
    if (product_of(a, f->factors) == w) ++rep.factorized;
  }
  rep.verdict = rep.factorized == rep.samples ? "verified" : "failed";
  return rep;
}

Factorization lemma2_reflection_word(const NilpotentAlgebra& a, const QVec& x, const std::vector<QWord>& pieces) {
  a.check(x);
  if (!a.is_graded()) throw Error("precondition", "reflection word needs a graded algebra");
  const int d = a.step();
  if (d < 2 || !only_layer(a, x, d - 1)) throw Error("precondition", "x must lie in layer d-1");
  Factorization f;
  f.center = x;
  if (pieces.empty()) {
    f.closed = true;
    return f;
  }
  std::vector<QVec> ys;
  std::vector<QVec> first;
  for (const auto& w : pieces) {
    if (!is_horizontal(a, w)) throw Error("precondition", "pieces must be horizontal words");
    ys.push_back(endpoint(a, w));
    first.push_back(bch_product(a, x, ys.back()));
  }
  const QVec z = product_of(a, first);
  if (!only_layer(a, z, d)) throw Error("precondition", "product of x y_k is not in the top layer");
  const std::size_t n = pieces.size();
  auto push = [&](QVec factor, QWord cert) {
    f.max_certificate_length = std::max(f.max_certificate_length, word_length(cert));
    f.factors.push_back(std::move(factor));
    f.certificates.push_back(std::move(cert));
  };
  if (d % 2 == 1) {
    // delta x = x and delta z = -z: the reflected run multiplies to z^{-1}.
    for (std::size_t k = 0; k < n; ++k) push(first[k], pieces[k]);
    for (std::size_t k = 0; k < n; ++k) {
      const QWord r = reflect_word(pieces[k]);
      push(bch_product(a, x, endpoint(a, r)), r);
    }
  } else {
    // delta x = x^{-1} and delta z = z: with x = delta(x^{-1}) the tail
    // delta(y_n^{-1}) x ... delta(y_1^{-1}) x equals delta(z^{-1}) = z^{-1}.
    for (std::size_t k = 0; k + 1 < n; ++k) push(first[k], pieces[k]);
    const QWord join = concat(pieces[n - 1], reflect_word(inverse_word(pieces[n - 1])));
    push(bch_product(a, x, endpoint(a, join)), join);
    for (std::size_t k = n - 1; k-- > 0;) {
      const QWord r = reflect_word(inverse_word(pieces[k]));
      push(bch_product(a, x, endpoint(a, r)), r);
    }
    push(x, QWord{});
  }
  f.closed = closes(a, f.factors);
  return f;
}

namespace {

QWord map_word(const QWord& w, const std::function<QVec(const QVec&)>& f) {
  QWord r;
  r.constraint = w.constraint;
  for (const auto& s : w.steps) r.steps.push_back({f(s.direction), s.duration});
  return r;
}

/// Threshold construction for a top-layer target of a graded algebra.
class TopPath {
 public:
  TopPath(const NilpotentAlgebra& a, const QVec& z, const ReachOptions& o)
      : z_(z), est_(a, o.cc), max_n_(o.max_n) {
    require_top_layer(a, z);
    if (a.step() < 2) throw Error("precondition", "threshold search needs step >= 2");
    base_ = base_word(est_, z, &radius_);
  }
  Search build(double eps) const { return threshold_search(est_, z_, eps, max_n_, base_); }
  double radius() const { return radius_; }

 private:
  QVec z_;
  CcEstimator est_;
  long max_n_;
  DWord base_;
  double radius_ = 0;
};

/// Threshold construction in N/N^d at eps/2 followed by the reflection word in N.
class QuotientPath {
 public:
  QuotientPath(const NilpotentAlgebra& a, const QVec& x, const ReachOptions& o) : a_(&a), x_(x) {
    a.check(x);
    if (!a.is_graded()) throw Error("precondition", "quotient construction needs a graded algebra");
    const int d = a.step();
    if (d < 3) throw Error("precondition", "the layer d-1 construction needs step d > 2");
    if (is_zero(x) || !only_layer(a, x, d - 1)) throw Error("precondition", "x must be a nonzero element of layer d-1");
    std::vector<QVec> top;
    for (auto i : a.layer_indices(d)) top.push_back(unit<Rational>(a.dim(), i));
    q_ = std::make_unique<QuotientResult>(quotient(a, top));
    top_ = std::make_unique<TopPath>(q_->algebra, q_->projection.apply(x), o);
  }

  std::optional<Factorization> build(double eps, long* quotient_n = nullptr, bool* incomplete = nullptr) const {
    Search s = top_->build(eps / 2);
    if (incomplete) *incomplete = s.incomplete;
    if (!s.witness) return std::nullopt;
    if (quotient_n) *quotient_n = s.n_hi;
    const auto& kept = q_->kept;
    const std::size_t n = a_->dim();
    std::vector<QWord> lifted;
    for (const auto& w : s.witness->certificates)
      lifted.push_back(map_word(w, [&](const QVec& v) {
        QVec r = zeros<Rational>(n);
        for (std::size_t i = 0; i < v.size(); ++i) r[kept[i]] = v[i];
        return r;
      }));
    return lemma2_reflection_word(*a_, x_, lifted);
  }
  double radius() const { return top_->radius(); }

 private:
  const NilpotentAlgebra* a_;
  QVec x_;
  std::unique_ptr<QuotientResult> q_;
  std::unique_ptr<TopPath> top_;
};

/// Either construction run in the free lift F/F^{d+1} and pushed down by pi.
class LiftedPath {
 public:
  LiftedPath(const NilpotentAlgebra& a, const QVec& x, int k, const ReachOptions& o) : a_(&a), x_(x) {
    a.check(x);
    const int d = a.step();
    if (k != d && k != d - 1) throw Error("precondition", "k must be d or d-1");
    if (k == d - 1 && d <= 2) throw Error("precondition", "the k = d-1 case needs step d > 2");
    bool nonzero_k = false;
    for (std::size_t i = 0; i < a.dim(); ++i) {
      if (a.layer(i) < k && sgn(x[i]) != 0) throw Error("precondition", "x in wrong filtration stratum");
      if (a.layer(i) == k && sgn(x[i]) != 0) nonzero_k = true;
    }
    if (!nonzero_k) throw Error("precondition", "x in wrong filtration stratum");
    lift_ = std::make_unique<FreeLift>(free_lift(a));
    const auto& f = lift_->free_algebra;
    const auto idx = f.layer_indices(k);
    std::vector<QVec> columns;
    for (auto j : idx) columns.push_back(lift_->projection.apply(unit<Rational>(f.dim(), j)));
    auto c = solve_in_span(columns, x);
    if (!c) throw Error("precondition", "x has no homogeneous lift of its layer");
    lifted_x_ = zeros<Rational>(f.dim());
    for (std::size_t j = 0; j < idx.size(); ++j) lifted_x_[idx[j]] = (*c)[j];
    if (k == d)
      top_ = std::make_unique<TopPath>(f, lifted_x_, o);
    else
      quot_ = std::make_unique<QuotientPath>(f, lifted_x_, o);
  }

  std::optional<Factorization> build(double eps, bool* incomplete = nullptr) const {
    std::optional<Factorization> up;
    if (top_) {
      Search s = top_->build(eps);
      if (incomplete) *incomplete = s.incomplete;
      up = std::move(s.witness);
    } else {
      up = quot_->build(eps, nullptr, incomplete);
    }
    if (!up) return std::nullopt;
    const auto& pi = lift_->projection;
    Factorization down;
    down.center = x_;
    down.max_certificate_length = up->max_certificate_length;
    for (const auto& v : up->factors) down.factors.push_back(pi.apply(v));
    for (const auto& w : up->certificates)
      down.certificates.push_back(map_word(w, [&](const QVec& v) { return pi.apply(v); }));
    down.closed = closes(*a_, down.factors);
    return down;
  }

  std::size_t lifted_dim() const { return lift_->free_algebra.dim(); }

 private:
  const NilpotentAlgebra* a_;
  QVec x_;
  std::unique_ptr<FreeLift> lift_;
  QVec lifted_x_;
  std::unique_ptr<TopPath> top_;
  std::unique_ptr<QuotientPath> quot_;
};

double exponent_for(int k) { return static_cast<double>(k) / static_cast<double>(k - 1); }

}  // namespace

std::optional<Factorization> corollary2_factorization(const NilpotentAlgebra& a, const QVec& x, double eps,
                                                      const ReachOptions& options) {
  return QuotientPath(a, x, options).build(eps);
}

Corollary2Experiment corollary2_threshold(const NilpotentAlgebra& a, const QVec& x, const std::vector<double>& eps_grid,
                                          const ReachOptions& options, bool keep_witnesses) {
  const QuotientPath path(a, x, options);
  Corollary2Experiment ex;
  ex.radius = path.radius();
  const double p = exponent_for(a.step() - 1);
  ex.rows.resize(eps_grid.size());
  std::vector<std::optional<Factorization>> kept(eps_grid.size());
  parallel_for(eps_grid.size(), [&](std::size_t i) {
    auto& row = ex.rows[i];
    row.eps = eps_grid[i];
    if (!(row.eps > 0)) throw Error("domain", "eps must be positive");
    row.bound = 2 * std::pow(2 * ex.radius / row.eps, p);
    auto f = path.build(row.eps, &row.quotient_n);
    if (!f) return;
    row.witnessed_n = static_cast<long>(f->factors.size());
    row.closed = f->closed;
    row.max_factor_distance = f->max_certificate_length;
    // Rounding n up to an integer in each of the two halves costs at most 2.
    row.within_bound = static_cast<double>(row.witnessed_n) <= row.bound + 2;
    if (keep_witnesses) kept[i] = std::move(f);
  });
  std::vector<double> inv, ns;
  for (std::size_t i = 0; i < ex.rows.size(); ++i) {
    const auto& r = ex.rows[i];
    if (r.witnessed_n == 0) continue;
    inv.push_back(1 / r.eps);
    ns.push_back(static_cast<double>(r.witnessed_n));
    ex.empirical_Q = std::max(ex.empirical_Q, ns.back() * std::pow(r.eps / ex.radius, p));
    if (kept[i]) ex.witnesses.push_back(std::move(*kept[i]));
  }
  if (inv.size() >= 2) {
    ex.fit = fit_loglog(inv, ns);
    ex.fitted = true;
  }
  return ex;
}

Theorem2Experiment theorem2_lifted_threshold(const NilpotentAlgebra& a, const QVec& x, int k,
                                             const std::vector<double>& eps_grid, const ReachOptions& options) {
  const LiftedPath path(a, x, k, options);
  Theorem2Experiment ex;
  ex.k = k;
  ex.lifted_dim = path.lifted_dim();
  const CcEstimator est(a, options.cc);
  ex.radius = est.upper(to_double(x)).upper;
  const double p = exponent_for(k);
  ex.rows.resize(eps_grid.size());
  parallel_for(eps_grid.size(), [&](std::size_t i) {
    auto& row = ex.rows[i];
    row.eps = eps_grid[i];
    if (!(row.eps > 0)) throw Error("domain", "eps must be positive");
    auto f = path.build(row.eps);
    if (!f) return;
    row.n = static_cast<long>(f->factors.size());
    row.pushed_closed = f->closed;
    row.max_factor_distance = f->max_certificate_length;
  });
  std::vector<double> inv, ns;
  for (const auto& r : ex.rows) {
    if (r.n == 0) continue;
    inv.push_back(1 / r.eps);
    ns.push_back(static_cast<double>(r.n));
    ex.empirical_Q = std::max(ex.empirical_Q, ns.back() * std::pow(r.eps / ex.radius, p));
  }
  if (inv.size() >= 2) {
    ex.fit = fit_loglog(inv, ns);
    ex.fitted = true;
  }
  return ex;
}

namespace {

ClosedCurve closed_curve_with(const LiftedPath& path, const NilpotentAlgebra& a, const QVec& x, double eps,
                              double factor) {
  ClosedCurve c;
  const double R = norm(x);
  if (eps > R) {
    // Evident case: exp(l x) exp(-l x) with both l x and -l x within eps of x.
    c.evident_case = true;
    Rational lambda = dyadic_approx((eps / R - 1) / 2, 30);
    if (sgn(lambda) < 0) lambda = 0;
    c.steps = {scale(lambda, x), scale(Rational(-lambda), x)};
  } else {
    for (int halvings = 0; halvings < 12; ++halvings, factor /= 2) {
      auto f = path.build(factor * eps);
      if (!f) continue;
      bool ok = true;
      for (const auto& v : f->factors)
        if (!(norm(sub(v, x)) < eps)) {
          ok = false;
          break;
        }
      if (!ok) continue;
      c.steps = std::move(f->factors);
      break;
    }
    if (c.steps.empty()) return c;
  }
  c.cc_radius_factor = factor;
  for (const auto& v : c.steps) {
    c.length += norm(v);
    c.max_deviation = std::max(c.max_deviation, norm(sub(v, x)));
  }
  c.closed = closes(a, c.steps);
  return c;
}

}  // namespace

ClosedCurve theorem3_closed_curve(const NilpotentAlgebra& a, const QVec& x, int k, double eps,
                                  const ReachOptions& options, double cc_radius_factor) {
  if (!(eps > 0)) throw Error("domain", "eps must be positive");
  const LiftedPath path(a, x, k, options);
  return closed_curve_with(path, a, x, eps, cc_radius_factor);
}

Theorem3Report theorem3_experiment(const NilpotentAlgebra& a, const QVec& x, int k, const std::vector<double>& eps_grid,
                                   const ReachOptions& options) {
  const LiftedPath path(a, x, k, options);
  Theorem3Report rep;
  rep.radius = CcEstimator(a, options.cc).upper(to_double(x)).upper;
  std::vector<ClosedCurve> curves(eps_grid.size());
  auto run = [&](double factor) {
    parallel_for(eps_grid.size(), [&](std::size_t i) { curves[i] = closed_curve_with(path, a, x, eps_grid[i], factor); });
  };
  run(1);
  // One CC radius factor for the whole grid, so the constant does not jump
  // between grid points.
  double common = 1;
  for (const auto& c : curves)
    if (!c.evident_case && !c.steps.empty()) common = std::min(common, c.cc_radius_factor);
  if (common < 1) run(common);
  const double p = exponent_for(k);
  std::vector<double> inv, len;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& c = curves[i];
    if (!c.steps.empty() && !c.evident_case) {
      inv.push_back(1 / eps_grid[i]);
      len.push_back(c.length);
      rep.empirical_P = std::max(rep.empirical_P, c.length * std::pow(eps_grid[i] / rep.radius, p));
    }
    rep.curves.emplace_back(eps_grid[i], c);
  }
  if (inv.size() >= 2) {
    rep.fit = fit_loglog(inv, len);
    rep.fitted = true;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Attainable sets

namespace {

DVec sample_cone_direction(const Cone& c, std::mt19937_64& rng, bool extreme) {
  std::normal_distribution<double> gauss;
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const std::size_t n = c.dim();
  DVec v(n, 0.0);
  auto gaussian = [&] {
    DVec g(n);
    for (auto& x : g) x = gauss(rng);
    return g;
  };
  switch (c.kind()) {
    case ConeKind::polyhedral:
      if (!c.generators().empty()) {
        const auto& gens = c.generators();
        if (extreme) {
          v = gens[std::uniform_int_distribution<std::size_t>(0, gens.size() - 1)(rng)];
        } else {
          for (const auto& g : gens) axpy(v, expo(rng), g);
        }
      } else {
        for (int tries = 0; tries < 100000; ++tries) {
          v = gaussian();
          if (c.contains(v)) break;
          if (tries + 1 == 100000) throw Error("invalid_cone", "rejection sampling found no cone direction");
        }
      }
      break;
    case ConeKind::lorentz: {
      const DVec& axis = c.axis();
      DVec w = gaussian();
      axpy(w, -dot_d(w, axis), axis);
      const double along = c.slope() * norm(w) * (extreme ? 1.0 : 1.0 + unif(rng));
      v = w;
      axpy(v, along, axis);
      break;
    }
    case ConeKind::power: {
      const auto& pr = c.profile();
      v = gaussian();
      double ny = 0;
      for (auto i : pr.y_indices) ny += v[i] * v[i];
      ny = std::sqrt(ny);
      const double sp = std::abs(v[pr.s_index]) + 0.1;
      const double tau_min = pr.coefficient * std::pow(ny, pr.exponent) / std::pow(sp, pr.exponent - 1);
      const double tau = extreme ? tau_min : tau_min + std::abs(gauss(rng));
      v[pr.tau_index] = tau;
      v[pr.s_index] = sp - pr.shear * tau;
      if (!c.contains(v, 1e-9)) v[pr.tau_index] = tau * (1 + 1e-9) + 1e-12;
      break;
    }
  }
  const double nv = norm(v);
  if (nv > 0)
    for (auto& x : v) x /= nv;
  return v;
}

}  // namespace

AttainableCloud attainable_sample(const NilpotentAlgebra& a, const Cone& c, std::size_t depth, double budget,
                                  std::size_t samples, unsigned seed, const SemidirectGroup* group) {
  const std::size_t want = a.dim() + (group ? 1 : 0);
  if (c.dim() != want) throw Error("algebra_mismatch", "cone dimension does not match the group coordinates");
  if (group && &group->base() != &a) throw Error("algebra_mismatch", "group is not built on this algebra");
  if (depth == 0 || !(budget >= 0)) throw Error("domain", "need depth >= 1 and budget >= 0");
  AttainableCloud cloud;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> steps_dist(1, depth);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  for (std::size_t s = 0; s < samples; ++s) {
    CloudPoint pt;
    const std::size_t steps = steps_dist(rng);
    const bool extreme = s % 4 == 3;  // every fourth word uses boundary directions
    std::vector<double> w(steps);
    for (auto& x : w) x = expo(rng);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    const double used = budget * unif(rng);
    DSdPoint cur{0.0, DVec(a.dim(), 0.0)};
    for (std::size_t k = 0; k < steps; ++k) {
      const DVec dir = sample_cone_direction(c, rng, extreme);
      const double dur = used * w[k] / total;
      cloud.max_cone_distance = std::max(cloud.max_cone_distance, c.distance(dir));
      if (group) {
        const DVec xi(dir.begin() + 1, dir.end());
        cur = group->product(cur, group->exp_G(dur * dir[0], scale(dur, xi)));
      } else {
        cur.x = bch_product(a, cur.x, scale(dur, dir));
      }
      cloud.min_chi = std::min(cloud.min_chi, cur.t);
      pt.directions.push_back(dir);
      pt.durations.push_back(dur);
    }
    pt.t = cur.t;
    pt.x = cur.x;
    cloud.points.push_back(std::move(pt));
  }
  return cloud;
}

CoverageReport grid_coverage(const AttainableCloud& cloud, double half, std::size_t bins) {
  CoverageReport rep;
  if (cloud.points.empty() || bins == 0) return rep;
  const std::size_t dim = cloud.points.front().x.size();
  rep.cells = 1;
  for (std::size_t i = 0; i < dim; ++i) rep.cells *= bins;
  std::vector<bool> seen(rep.cells, false);
  for (const auto& p : cloud.points) {
    std::size_t cell = 0;
    bool inside = true;
    for (std::size_t i = 0; i < dim && inside; ++i) {
      const double u = (p.x[i] + half) / (2 * half);
      if (!(u >= 0 && u < 1)) inside = false;
      cell = cell * bins + static_cast<std::size_t>(u * static_cast<double>(bins));
    }
    if (inside && !seen[cell]) {
      seen[cell] = true;
      ++rep.hit;
    }
  }
  rep.fraction = static_cast<double>(rep.hit) / static_cast<double>(rep.cells);
  return rep;
}

// ---------------------------------------------------------------------------
// Halfspace attainability

Theorem1Example theorem1_example(double exponent, double coefficient) {
  NilpotentAlgebra heis = build_free_nilpotent(2, 2);
  QMatrix d(3, QVec(3, Rational(0)));
  d[1][0] = 1;  // e1 -> e2
  PowerProfile profile;
  profile.tau_index = 0;
  profile.s_index = 3;
  profile.y_indices = {1, 2};
  profile.exponent = exponent;
  profile.coefficient = coefficient;
  profile.shear = 1;
  Cone cone = Cone::power(4, profile);
  return {std::move(heis), std::move(d), std::move(cone), DVec{0, 0, 0, 1}, DVec{1, 0, 0, 0}};
}

namespace {

struct Plan {
  std::vector<std::pair<double, DVec>> steps;  // (tau, xi) cone elements
  double tau_total = 0;
};

/// Horizontal steering word for `horizontal`; every step u_j gets the drift
/// s_j p with s_j proportional to |u_j| (summing to `drift`) and the minimal
/// boost along v that puts (0, s_j p + u_j) into the cone.
std::optional<Plan> plan_steps(const CcEstimator& est, const Cone& cone, const DVec& pn, const DVec& v,
                               const DVec& horizontal, double drift) {
  Plan plan;
  auto w = est.steer(horizontal);
  if (!w) return std::nullopt;
  const DWord word = merge_steps(*w);
  const double length = word_length(word);
  for (const auto& s : word.steps) {
    const DVec u = scale(s.duration, s.direction);
    const double share = length > 0 ? norm(u) / length : 0;
    DVec elem(cone.dim(), 0.0);
    for (std::size_t i = 0; i < u.size(); ++i) elem[i + 1] = u[i] + drift * share * pn[i];
    auto boost = membership_boost(cone, elem, v);
    if (!boost) return std::nullopt;
    axpy(elem, *boost * (1 + 1e-3), v);
    if (!cone.contains(elem, 1e-12)) return std::nullopt;
    plan.tau_total += elem[0];
    plan.steps.emplace_back(elem[0], DVec(elem.begin() + 1, elem.end()));
  }
  if (length == 0 && drift > 0) {
    // Pure drift: a single step along p.
    DVec elem(cone.dim(), 0.0);
    for (std::size_t i = 0; i < pn.size(); ++i) elem[i + 1] = drift * pn[i];
    auto boost = membership_boost(cone, elem, v);
    if (!boost) return std::nullopt;
    axpy(elem, *boost * (1 + 1e-3), v);
    plan.tau_total += elem[0];
    plan.steps.emplace_back(elem[0], DVec(elem.begin() + 1, elem.end()));
  }
  return plan;
}

DSdPoint run_plan(const SemidirectGroup& g, const Plan& plan, double lead, double* min_chi) {
  DSdPoint cur = g.identity<double>();
  if (lead > 0) cur.t = lead;  // (lead, 0) first: it does not twist what follows
  *min_chi = std::min(0.0, cur.t);
  for (const auto& [tau, xi] : plan.steps) {
    cur = g.product(cur, g.exp_G(tau, xi));
    *min_chi = std::min(*min_chi, cur.t);
  }
  return cur;
}

Theorem1Point reach_point(const SemidirectGroup& g, const CcEstimator& est, const Cone& cone, const DVec& pn,
                          const DVec& v, double target_t, const DVec& target_x, double tol) {
  Theorem1Point pt;
  pt.target_t = target_t;
  pt.target_x = target_x;
  pt.reached_x = DVec(target_x.size(), 0.0);
  if (target_t == 0 && norm(target_x) == 0) {
    pt.reached = true;  // empty word
    return pt;
  }
  // Time available for the boosts: all of target_t, or a small share of the
  // tolerance when the target lies in N.
  const double allowance = target_t > 0 ? target_t : 0.2 * tol;
  std::optional<Plan> plan;
  double drift = 0;
  for (int e = -4; e <= 24 && !plan; ++e) {
    drift = std::ldexp(1.0, e);
    auto trial = plan_steps(est, cone, pn, v, sub(target_x, scale(drift, pn)), drift);
    if (trial && trial->tau_total <= allowance) plan = std::move(trial);
  }
  if (!plan) return pt;
  pt.drift = drift;
  DVec horizontal = sub(target_x, scale(drift, pn));
  DSdPoint end{};
  double min_chi = 0;
  for (int iter = 0; iter < 60; ++iter) {
    const double lead = target_t > 0 ? std::max(0.0, target_t - plan->tau_total) : 0.0;
    end = run_plan(g, *plan, lead, &min_chi);
    const DVec miss = sub(target_x, end.x);
    if (norm(miss) <= 1e-3 * tol) break;
    horizontal = add(horizontal, miss);
    auto next = plan_steps(est, cone, pn, v, horizontal, drift);
    if (!next) break;
    plan = std::move(next);
  }
  pt.reached_t = end.t;
  pt.reached_x = end.x;
  pt.steps = plan->steps.size() + ((target_t > 0 && target_t > plan->tau_total) ? 1 : 0);
  pt.min_prefix_chi = min_chi;
  const double dt = end.t - target_t;
  pt.distance = std::sqrt(dt * dt + std::pow(norm(sub(end.x, target_x)), 2));
  pt.reached = pt.distance <= tol;
  return pt;
}

}  // namespace

Theorem1Report theorem1_demonstration(const SemidirectGroup& g, const Cone& cone, const DVec& p, const DVec& v,
                                      const Theorem1Options& options) {
  const auto& a = g.base();
  const std::size_t n = a.dim();
  if (cone.dim() != n + 1 || p.size() != n + 1 || v.size() != n + 1)
    throw Error("algebra_mismatch", "cone, p and v must live in R + N coordinates");
  Theorem1Report rep;
  const int d = a.step();
  rep.threshold = d > 1 ? static_cast<double>(d) / (d - 1) : 0;
  const DVec pn(p.begin() + 1, p.end());
  const DVec vn(v.begin() + 1, v.end());
  auto add_check = [&](std::string name, bool ok, double margin, std::string detail) {
    rep.hypotheses.push_back({std::move(name), ok, margin, std::move(detail)});
  };

  const InteriorResult p_int = cone.interior(p);
  add_check("p_on_boundary", cone.contains(p, 1e-12) && !p_int.inside, cone.distance(p),
            "p must lie in C but not in its interior");

  bool top = p[0] == 0 && norm(pn) > 0;
  for (std::size_t i = 0; i < n; ++i)
    if (a.layer(i) != d && pn[i] != 0) top = false;
  add_check("p_in_top_layer", top, 0, "p must be a nonzero element of N_d");

  const DVec adv = add(scale(v[0], g.apply_derivation(pn)), bracket(a, vn, pn));
  add_check("centralizer", norm(adv) <= 1e-12, norm(adv), "ad(v) p = v_t D p + [v_N, p] must vanish");

  const InteriorResult v_int = cone.interior(v);
  add_check("v_interior", v_int.inside, v_int.margin, "v must lie in the interior of C");

  const DerivationReport der = g.check_derivation();
  add_check("layer1_invariant", der.derivation && der.layer1_invariant, 0,
            "D must be a derivation mapping N_1 into itself");

  std::vector<DVec> layer1;
  for (auto i : a.layer_indices(1)) {
    DVec e(n + 1, 0.0);
    e[i + 1] = 1;
    layer1.push_back(e);
  }
  ContactOptions copt = options.contact;
  if (copt.radii.empty())
    for (int i = 0; i < 16; ++i) copt.radii.push_back(std::pow(10.0, -2.0 + 2.0 * i / 15.0));
  const ContactEstimate contact = degree_of_contact(cone, layer1, p, copt);
  rep.contact_exponent = contact.exponent;
  add_check("degree_of_contact", contact.measurable && contact.exponent > rep.threshold + options.contact_margin,
            contact.exponent - rep.threshold,
            "contact of C with N_1 at p must exceed d/(d-1) by the required margin");

  rep.hypotheses_hold = true;
  for (const auto& h : rep.hypotheses)
    if (!h.passed) {
      rep.hypotheses_hold = false;
      rep.failed.push_back(h.name);
    }
  if (!rep.hypotheses_hold) return rep;

  CcOptions cc;
  cc.refine = false;
  const CcEstimator est(a, cc);
  std::vector<std::pair<double, DVec>> targets;
  auto grid_axis = [](std::size_t count, double half) {
    std::vector<double> xs;
    for (std::size_t i = 0; i < count; ++i)
      xs.push_back(count == 1 ? 0.0 : -half + 2 * half * static_cast<double>(i) / static_cast<double>(count - 1));
    return xs;
  };
  auto add_grid = [&](std::size_t count, double t) {
    const auto xs = grid_axis(count, options.half_width);
    std::vector<std::size_t> digits(n, 0);
    while (true) {
      DVec x(n);
      for (std::size_t i = 0; i < n; ++i) x[i] = xs[digits[i]];
      targets.emplace_back(t, x);
      std::size_t i = 0;
      while (i < n && ++digits[i] == count) digits[i++] = 0;
      if (i == n) break;
    }
  };
  add_grid(options.grid, 0.0);
  if (options.shell_grid > 0) add_grid(options.shell_grid, options.shell_t);

  rep.points.resize(targets.size());
  parallel_for(targets.size(), [&](std::size_t i) {
    rep.points[i] = reach_point(g, est, cone, pn, v, targets[i].first, targets[i].second, options.tolerance);
  });
  for (const auto& pt : rep.points) {
    if (pt.reached) ++rep.reached;
    if (pt.min_prefix_chi < -1e-9 || pt.reached_t < -1e-9) ++rep.negative_chi;
    rep.worst_distance = std::max(rep.worst_distance, pt.distance);
  }
  return rep;
}

}  // namespace nilcc
