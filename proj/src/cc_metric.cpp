#include "nilcc/cc_metric.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "nilcc/linalg.hpp"

namespace nilcc {

namespace {

// Rational with about 20 significant bits; keeps exact words small.
Rational short_rational(double x) {
  if (x == 0) return Rational(0);
  int e = 0;
  const double m = std::frexp(x, &e);
  return exact_rational(std::ldexp(std::nearbyint(std::ldexp(m, 20)), e - 20));
}

template <class S>
bool same_direction(const Vec<S>& u, const Vec<S>& v) {
  return u == v;
}

// Exact square root of a nonnegative rational, if it is a perfect square.
std::optional<Rational> exact_sqrt(const Rational& q) {
  if (sgn(q) < 0) return std::nullopt;
  if (!mpz_perfect_square_p(q.get_num_mpz_t()) || !mpz_perfect_square_p(q.get_den_mpz_t())) return std::nullopt;
  mpz_class n, d;
  mpz_sqrt(n.get_mpz_t(), q.get_num_mpz_t());
  mpz_sqrt(d.get_mpz_t(), q.get_den_mpz_t());
  Rational r(n, d);
  r.canonicalize();
  return r;
}

template <class S>
S cut_duration(const Vec<S>& direction, double piece_length) {
  if constexpr (ScalarTraits<S>::exact) {
    Rational n2 = 0;
    for (const auto& c : direction) n2 += c * c;
    if (auto r = exact_sqrt(n2)) {
      return Rational(exact_rational(piece_length) / *r);
    }
    return dyadic_approx(piece_length / std::sqrt(n2.get_d()), 40);
  } else {
    return piece_length / norm(direction);
  }
}

template <class S>
Step<S> letter_step(std::size_t dim, std::size_t index, const S& scale) {
  Vec<S> dir(dim, S(0));
  dir[index] = scale < 0 ? S(-1) : S(1);
  return {dir, scale < 0 ? S(-scale) : scale};
}

// Word whose endpoint is prod(scales) [b_{l0},[b_{l1},...]] modulo higher layers.
template <class S>
ControlWord<S> commutator_word(std::size_t dim, const std::vector<std::size_t>& letters,
                               const std::vector<S>& scales, std::size_t from = 0) {
  ControlWord<S> a;
  a.steps.push_back(letter_step(dim, letters[from], scales[from]));
  if (from + 1 == letters.size()) return a;
  ControlWord<S> rest = commutator_word(dim, letters, scales, from + 1);
  ControlWord<S> w = concat(a, rest);
  w = concat(w, inverse_word(a));
  return concat(w, inverse_word(rest));
}

// Odometer step over digits in [0, base); false once every combination is used.
bool advance(std::vector<std::size_t>& digits, std::size_t base) {
  for (std::size_t pos = digits.size(); pos-- > 0;) {
    if (++digits[pos] < base) return true;
    digits[pos] = 0;
  }
  return false;
}

DVec first_layer_part(const NilpotentAlgebra& a, const DVec& x) { return layer_part(a, x, 1); }

}  // namespace

// ---------------------------------------------------------------------------
// Word primitives

template <class S>
Vec<S> endpoint(const NilpotentAlgebra& a, const ControlWord<S>& w) {
  Vec<S> p(a.dim(), S(0));
  for (const auto& s : w.steps) p = bch_product(a, p, scale(s.duration, s.direction));
  return p;
}

template <class S>
double word_length(const ControlWord<S>& w) {
  double total = 0;
  for (const auto& s : w.steps) total += to_double(s.duration) * norm(s.direction);
  return total;
}

template <class S>
ControlWord<S> concat(const ControlWord<S>& u, const ControlWord<S>& v) {
  ControlWord<S> r = u;
  r.steps.insert(r.steps.end(), v.steps.begin(), v.steps.end());
  return r;
}

template <class S>
ControlWord<S> inverse_word(const ControlWord<S>& w) {
  ControlWord<S> r;
  r.constraint = w.constraint;
  for (auto it = w.steps.rbegin(); it != w.steps.rend(); ++it) r.steps.push_back({neg(it->direction), it->duration});
  return r;
}

template <class S>
ControlWord<S> merge_steps(const ControlWord<S>& w) {
  ControlWord<S> r;
  r.constraint = w.constraint;
  for (const auto& s : w.steps) {
    if (ScalarTraits<S>::is_zero(s.duration) || is_zero(s.direction)) continue;
    Step<S> cur = s;
    while (!r.steps.empty()) {
      Step<S>& last = r.steps.back();
      if (same_direction(last.direction, cur.direction)) {
        cur.duration += last.duration;
      } else if (same_direction(last.direction, neg(cur.direction))) {
        cur.duration -= last.duration;
      } else {
        break;
      }
      r.steps.pop_back();
      if (cur.duration < 0) {
        cur.duration = -cur.duration;
        cur.direction = neg(cur.direction);
      }
    }
    if (!ScalarTraits<S>::is_zero(cur.duration)) r.steps.push_back(std::move(cur));
  }
  return r;
}

template <class S>
std::vector<ControlWord<S>> split_by_length(const ControlWord<S>& w, std::size_t pieces) {
  if (pieces == 0) throw Error("precondition", "split_by_length needs at least one piece");
  std::vector<ControlWord<S>> out(pieces);
  for (auto& p : out) p.constraint = w.constraint;
  const double total = word_length(w);
  const double target = total / static_cast<double>(pieces);
  std::size_t current = 0;
  double filled = 0;
  for (const auto& s0 : w.steps) {
    Step<S> s = s0;
    while (true) {
      const double len = to_double(s.duration) * norm(s.direction);
      const double room = target - filled;
      if (current + 1 == pieces || len <= room) {
        out[current].steps.push_back(s);
        filled += len;
        break;
      }
      S cut = cut_duration(s.direction, room);
      if (!(cut > S(0))) cut = S(0);
      if (!(cut < s.duration)) cut = s.duration;
      if (cut > S(0)) out[current].steps.push_back({s.direction, cut});
      s.duration -= cut;
      ++current;
      filled = 0;
      if (ScalarTraits<S>::is_zero(s.duration)) break;
    }
  }
  return out;
}

template <class S>
bool is_horizontal(const NilpotentAlgebra& a, const ControlWord<S>& w) {
  for (const auto& s : w.steps) {
    a.check(s.direction);
    for (std::size_t i = 0; i < a.dim(); ++i)
      if (a.layer(i) != 1 && !ScalarTraits<S>::is_zero(s.direction[i])) return false;
  }
  return true;
}

QWord to_exact(const DWord& w) {
  QWord r;
  r.constraint = w.constraint;
  for (const auto& s : w.steps) r.steps.push_back({to_rational(s.direction), exact_rational(s.duration)});
  return r;
}

DWord to_float(const QWord& w) {
  DWord r;
  r.constraint = w.constraint;
  for (const auto& s : w.steps) r.steps.push_back({to_double(s.direction), s.duration.get_d()});
  return r;
}

#define NILCC_INSTANTIATE(S)                                                                      \
  template Vec<S> endpoint(const NilpotentAlgebra&, const ControlWord<S>&);                       \
  template double word_length(const ControlWord<S>&);                                             \
  template ControlWord<S> concat(const ControlWord<S>&, const ControlWord<S>&);                   \
  template ControlWord<S> inverse_word(const ControlWord<S>&);                                    \
  template ControlWord<S> merge_steps(const ControlWord<S>&);                                     \
  template std::vector<ControlWord<S>> split_by_length(const ControlWord<S>&, std::size_t);       \
  template bool is_horizontal(const NilpotentAlgebra&, const ControlWord<S>&);
NILCC_INSTANTIATE(Rational)
NILCC_INSTANTIATE(double)
#undef NILCC_INSTANTIATE

// ---------------------------------------------------------------------------
// Estimator

CcEstimator::CcEstimator(const NilpotentAlgebra& algebra, CcOptions options)
    : algebra_(&algebra), options_(options) {
  const auto& a = algebra;
  const auto gens = a.layer_indices(1);
  const std::size_t n = a.dim();
  monomials_.resize(static_cast<std::size_t>(a.step()) + 1);
  for (int k = 2; k <= a.step(); ++k) {
    const std::size_t want = a.layer_indices(k).size();
    if (want == 0) continue;
    Echelon span(n);
    std::vector<std::size_t> digits(static_cast<std::size_t>(k), 0);
    while (span.rank() < want) {
      std::vector<std::size_t> letters(digits.size());
      for (std::size_t i = 0; i < digits.size(); ++i) letters[i] = gens[digits[i]];
      if (letters[letters.size() - 1] != letters[letters.size() - 2]) {
        QVec v = unit<Rational>(n, letters.back());
        for (std::size_t i = letters.size() - 1; i-- > 0;) v = bracket(a, unit<Rational>(n, letters[i]), v);
        QVec proj = layer_part(a, v, k);
        if (!is_zero(proj) && span.insert(proj)) monomials_[k].push_back({letters, proj, to_double(proj)});
      }
      if (!advance(digits, gens.size())) break;
    }
  }
}

template <class S>
std::optional<ControlWord<S>> CcEstimator::steer_impl(const Vec<S>& target) const {
  const auto& a = *algebra_;
  a.check(target);
  const std::size_t n = a.dim();
  ControlWord<S> word;
  Vec<S> first = layer_part(a, target, 1);
  if (!is_zero(first)) word.steps.push_back({first, S(1)});
  Vec<S> reached = first;
  for (int k = 2; k <= a.step(); ++k) {
    const Vec<S> residual = bch_product(a, neg(reached), target);
    const Vec<S> part = layer_part(a, residual, k);
    if (is_zero(part)) continue;
    const auto& monos = monomials_[static_cast<std::size_t>(k)];
    std::optional<Vec<S>> coeffs;
    if constexpr (ScalarTraits<S>::exact) {
      std::vector<QVec> cols;
      for (const auto& m : monos) cols.push_back(m.projection);
      coeffs = solve_in_span(cols, part);
    } else {
      std::vector<DVec> cols;
      for (const auto& m : monos) cols.push_back(m.projection_d);
      coeffs = solve_in_span(cols, part, 1e-9);
    }
    if (!coeffs) return std::nullopt;
    ControlWord<S> layer_word;
    for (std::size_t m = 0; m < monos.size(); ++m) {
      const S& c = (*coeffs)[m];
      if (ScalarTraits<S>::is_zero(c)) continue;
      const double mag = std::pow(std::fabs(to_double(c)), 1.0 / k);
      std::vector<S> scales(static_cast<std::size_t>(k));
      if constexpr (ScalarTraits<S>::exact) {
        Rational prod = 1;
        for (int i = 0; i + 1 < k; ++i) {
          scales[static_cast<std::size_t>(i)] = short_rational(mag);
          prod *= scales[static_cast<std::size_t>(i)];
        }
        scales.back() = c / prod;
      } else {
        std::fill(scales.begin(), scales.end(), mag);
        if (c < 0) scales.front() = -mag;
      }
      layer_word = concat(layer_word, commutator_word(n, monos[m].letters, scales));
    }
    word = concat(word, layer_word);
    reached = bch_product(a, reached, endpoint(a, layer_word));
  }
  return merge_steps(word);
}

std::optional<DWord> CcEstimator::steer(const DVec& target) const { return steer_impl(target); }
std::optional<QWord> CcEstimator::steer_exact(const QVec& target) const { return steer_impl(target); }

DWord CcEstimator::refine(const DWord& start, const DVec& target, std::size_t& evaluations) const {
  const auto& a = *algebra_;
  const auto gens = a.layer_indices(1);
  // parameters: first-layer displacement of every step
  std::vector<DVec> disp;
  for (const auto& s : start.steps) disp.push_back(scale(s.duration, s.direction));
  auto build = [&](const std::vector<DVec>& d) {
    DWord w;
    for (const auto& v : d)
      if (!is_zero(v)) w.steps.push_back({v, 1.0});
    return w;
  };
  auto cost = [&](const std::vector<DVec>& d) {
    ++evaluations;
    DWord w = build(d);
    DVec miss = bch_product(a, neg(endpoint(a, w)), target);
    auto fix = steer(miss);
    if (!fix) return std::numeric_limits<double>::infinity();
    return word_length(w) + word_length(*fix);
  };
  double best = cost(disp);
  auto descend = [&] {
    for (double h = 0.25; h > 1.0 / 128; h /= 2) {
      for (int pass = 0; pass < 3; ++pass) {
        bool improved = false;
        for (std::size_t i = 0; i < disp.size(); ++i) {
          const double size = norm(disp[i]);
          if (size == 0) continue;
          for (std::size_t g : gens) {
            for (double sign : {1.0, -1.0}) {
              if (evaluations >= options_.budget) return;
              std::vector<DVec> trial = disp;
              trial[i][g] += sign * h * size;
              const double c = cost(trial);
              if (c < best * (1 - 1e-12)) {
                best = c;
                disp = std::move(trial);
                improved = true;
                break;
              }
            }
          }
        }
        if (!improved) break;
      }
    }
  };
  descend();
  // One subdivision round lets polygonal loops round their corners.
  if (4 * disp.size() <= options_.word_cap) {
    std::vector<DVec> halves;
    for (const auto& v : disp) {
      halves.push_back(scale(0.5, v));
      halves.push_back(scale(0.5, v));
    }
    disp = std::move(halves);
    descend();
  }
  DWord w = build(disp);
  DVec miss = bch_product(a, neg(endpoint(a, w)), target);
  auto fix = steer(miss);
  if (!fix) return start;
  return merge_steps(concat(w, *fix));
}

DistanceEstimate CcEstimator::finish(DistanceEstimate est) const {
  est.upper = word_length(est.witness);
  est.residual = norm(sub(endpoint(*algebra_, est.witness), est.target));
  est.lower = lower(est.target);
  if (est.lower > est.upper) est.lower = est.upper;  // rounding in the isoperimetric bound
  est.reached = est.residual <= options_.tolerance * std::max(1.0, norm(est.target)) &&
                est.witness.size() <= options_.word_cap;
  return est;
}

DistanceEstimate CcEstimator::upper(const DVec& target, const std::vector<DWord>& seeds) const {
  const auto& a = *algebra_;
  a.check(target);
  DistanceEstimate est;
  est.target = target;
  if (is_zero(target)) {
    est.methods = {"identity"};
    return finish(est);
  }
  const double tol = options_.tolerance * std::max(1.0, norm(target));
  struct Candidate {
    DWord word;
    std::string method;
  };
  std::vector<Candidate> candidates;
  if (auto w = steer(target)) candidates.push_back({*w, "layered-steering"});
  for (const auto& seed : seeds) {
    if (!is_horizontal(a, seed)) continue;
    const DVec miss = bch_product(a, neg(endpoint(a, seed)), target);
    if (norm(miss) <= tol) {
      candidates.push_back({seed, "seed"});
    } else if (auto fix = steer(miss)) {
      candidates.push_back({merge_steps(concat(seed, *fix)), "seed+steering"});
    }
  }
  if (candidates.empty()) {
    est.reached = false;
    est.methods = {"no-witness"};
    est.upper = std::numeric_limits<double>::infinity();
    est.lower = lower(target);
    return est;
  }
  auto admissible = [&](const DWord& w) {
    return w.size() <= options_.word_cap && norm(sub(endpoint(a, w), target)) <= tol;
  };
  std::size_t best = candidates.size();
  std::size_t shortest_any = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (word_length(candidates[i].word) < word_length(candidates[shortest_any].word)) shortest_any = i;
    if (!admissible(candidates[i].word)) continue;
    if (best == candidates.size() || word_length(candidates[i].word) < word_length(candidates[best].word))
      best = i;
  }
  if (best == candidates.size()) {
    est.witness = candidates[shortest_any].word;
    est.methods = {candidates[shortest_any].method, "no-witness"};
    est = finish(est);
    est.reached = false;
    return est;
  }
  est.witness = candidates[best].word;
  est.methods = {candidates[best].method};
  if (options_.refine && word_length(est.witness) > lower(target) * (1 + 1e-12)) {
    DWord refined = refine(est.witness, target, est.evaluations);
    if (admissible(refined) && word_length(refined) < word_length(est.witness)) {
      est.witness = refined;
      est.methods.push_back("coordinate-refinement");
    }
  }
  return finish(est);
}

DistanceEstimate CcEstimator::upper_exact(const QVec& target) const {
  const auto& a = *algebra_;
  a.check(target);
  DistanceEstimate est = upper(to_double(target));
  QWord exact;
  if (!est.witness.empty()) {
    exact = to_exact(est.witness);
    const QVec miss = bch_product(a, neg(endpoint(a, exact)), target);
    auto fix = steer_exact(miss);
    if (!fix) throw Error("internal", "exact correction failed");
    exact = merge_steps(concat(exact, *fix));
  } else if (!is_zero(target)) {
    auto w = steer_exact(target);
    if (!w) throw Error("precondition", "first layer does not generate the algebra");
    exact = *w;
  }
  if (endpoint(a, exact) != target) throw Error("internal", "exact witness misses its target");
  est.exact_witness = exact;
  est.witness = to_float(exact);
  est.methods.push_back("exact-correction");
  est = finish(est);
  est.residual = 0;
  return est;
}

double CcEstimator::lower(const DVec& target) const {
  const auto& a = *algebra_;
  a.check(target);
  const double l1 = norm(first_layer_part(a, target));
  double best = l1;
  if (a.step() >= 2) {
    const DVec x2 = layer_part(a, target, 2);
    const double n2 = norm(x2);
    if (n2 > 0) {
      // |<w, x_2>| <= sigma_w (L + |x_1|)^2 / (4 pi) for unit w, by the
      // isoperimetric inequality applied to the curve closed by a chord.
      const auto gens = a.layer_indices(1);
      const auto g = static_cast<Eigen::Index>(gens.size());
      Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(g, g);
      for (Eigen::Index i = 0; i < g; ++i)
        for (Eigen::Index j = 0; j < g; ++j)
          for (const auto& [k, c] : a.structure_d(gens[i], gens[j]))
            if (a.layer(k) == 2) omega(i, j) += c * x2[k] / n2;
      const double sigma = g > 0 ? Eigen::JacobiSVD<Eigen::MatrixXd>(omega).singularValues()(0) : 0.0;
      if (sigma > 0) best = std::max(best, std::sqrt(4 * M_PI * n2 / sigma) - l1);
    }
  }
  return best;
}

DistanceEstimate CcEstimator::distance(const DVec& x, const DVec& y) const {
  DistanceEstimate est = upper(bch_product(*algebra_, neg(x), y));
  est.methods.push_back("left-invariant-reduction");
  return est;
}

// ---------------------------------------------------------------------------
// Property reports

std::vector<HomogeneityRow> homogeneity_check(const CcEstimator& est, const DVec& x,
                                              const std::vector<double>& t_grid) {
  const double base = est.upper(x).upper;
  std::vector<HomogeneityRow> rows;
  for (double t : t_grid) {
    const double u = t == 1.0 ? base : est.upper(dilation(est.algebra(), t, x)).upper;
    const double dev = base > 0 ? std::fabs(u - t * base) / (t * base) : std::fabs(u);
    rows.push_back({t, u, dev, dev > 0.05});
  }
  return rows;
}

std::vector<IsometryRow> isometry_check_delta_minus_one(const CcEstimator& est, const std::vector<DVec>& sample,
                                                        double tolerance) {
  std::vector<IsometryRow> rows;
  for (const auto& x : sample) {
    const double u = est.upper(x).upper;
    const double r = est.upper(delta_minus_one(est.algebra(), x)).upper;
    const double scale_ = std::max(u, r);
    const double gap = scale_ > 0 ? std::fabs(u - r) / scale_ : 0.0;
    rows.push_back({u, r, gap, gap > tolerance});
  }
  return rows;
}

std::vector<SubadditivityRow> subadditivity_check(const CcEstimator& est,
                                                  const std::vector<std::pair<DVec, DVec>>& pairs, double tol) {
  std::vector<SubadditivityRow> rows;
  for (const auto& [x, y] : pairs) {
    const DistanceEstimate ex = est.upper(x), ey = est.upper(y);
    const DVec xy = bch_product(est.algebra(), x, y);
    const DistanceEstimate exy = est.upper(xy, {concat(ex.witness, ey.witness)});
    const double rhs = ex.upper + ey.upper;
    rows.push_back({exy.upper, rhs, exy.reached && exy.upper <= rhs + tol});
  }
  return rows;
}

AsymptoticMetricReport asymptotic_metric_estimate(const CcEstimator& est, const DVec& x, const DVec& y,
                                                  const std::vector<double>& t_grid) {
  AsymptoticMetricReport rep;
  for (double t : t_grid) {
    if (!(t > 0)) throw Error("domain", "asymptotic metric needs t > 0");
    const auto& a = est.algebra();
    const double k = est.distance(dilation(a, t, x), dilation(a, t, y)).upper;
    rep.rows.push_back({t, k / t});
  }
  if (rep.rows.size() >= 2) {
    std::vector<AsymptoticMetricRow> sorted = rep.rows;
    std::sort(sorted.begin(), sorted.end(), [](const auto& p, const auto& q) { return p.t < q.t; });
    const double a = sorted[sorted.size() - 2].value, b = sorted.back().value;
    rep.last_relative_change = std::max(a, b) > 0 ? std::fabs(a - b) / std::max(a, b) : 0.0;
  }
  return rep;
}

}  // namespace nilcc
