#include "nilcc/bch.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace nilcc {

namespace {

Rational factorial(int n) {
  mpz_class f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return Rational(f);
}

// Accumulates the Dynkin terms of total degree k into `out`, keyed by word.
void dynkin_degree(int k, std::map<std::string, Rational>& out) {
  struct Frame {
    std::string word;
    int pairs;
    Rational denom;  // product of r_i! s_i!
  };
  std::vector<Frame> stack{{"", 0, Rational(1)}};
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    const int used = static_cast<int>(f.word.size());
    if (used == k) {
      const std::string& w = f.word;
      // right-nested brackets ending in a repeated letter vanish
      if (k >= 2 && w[k - 1] == w[k - 2]) continue;
      Rational c = Rational(f.pairs % 2 == 1 ? 1 : -1) / (Rational(f.pairs) * Rational(k) * f.denom);
      out[w] += c;
      continue;
    }
    const int left = k - used;
    for (int r = 0; r <= left; ++r) {
      for (int s = 0; r + s <= left; ++s) {
        if (r + s == 0) continue;
        stack.push_back({f.word + std::string(r, 'x') + std::string(s, 'y'), f.pairs + 1,
                         f.denom * factorial(r) * factorial(s)});
      }
    }
  }
}

std::unique_ptr<BchTable> build_table(int max_degree) {
  auto table = std::make_unique<BchTable>();
  table->max_degree = max_degree;
  std::map<std::string, int> node_of;
  // suffix nodes, shortest first
  auto node_for = [&](auto&& self, const std::string& w) -> int {
    auto it = node_of.find(w);
    if (it != node_of.end()) return it->second;
    int tail = w.size() > 1 ? self(self, w.substr(1)) : -1;
    int id = static_cast<int>(table->nodes.size());
    table->nodes.push_back({w[0] == 'x' ? 0 : 1, tail, static_cast<int>(w.size())});
    node_of[w] = id;
    return id;
  };
  for (int k = 2; k <= max_degree; ++k) {
    std::map<std::string, Rational> words;
    dynkin_degree(k, words);
    for (const auto& [w, c] : words) {
      if (sgn(c) == 0) continue;
      table->terms.push_back({node_for(node_for, w), c, c.get_d()});
    }
  }
  return table;
}

}  // namespace

std::vector<std::pair<std::string, Rational>> BchTable::degree_part(int k) const {
  std::vector<std::pair<std::string, Rational>> out;
  for (const auto& t : terms) {
    if (nodes[t.node].degree != k) continue;
    std::string w;
    for (int n = t.node; n >= 0; n = nodes[n].tail) w += nodes[n].letter == 0 ? 'x' : 'y';
    out.emplace_back(w, t.coeff);
  }
  return out;
}

const BchTable& bch_table(int max_degree) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<BchTable>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[max_degree];
  if (!slot) slot = build_table(max_degree);
  return *slot;
}

template <class S>
Vec<S> bch_product(const NilpotentAlgebra& a, const Vec<S>& x, const Vec<S>& y) {
  a.check(x);
  a.check(y);
  Vec<S> r = add(x, y);
  if (a.step() < 2) return r;
  const BchTable& table = bch_table(a.step());
  const bool xz = is_zero(x), yz = is_zero(y);
  if (xz || yz) return r;
  std::vector<Vec<S>> value(table.nodes.size());
  std::vector<char> zero(table.nodes.size(), 0);
  for (std::size_t i = 0; i < table.nodes.size(); ++i) {
    const auto& n = table.nodes[i];
    const Vec<S>& letter = n.letter == 0 ? x : y;
    if (n.tail < 0) {
      value[i] = letter;
      continue;
    }
    if (zero[n.tail]) {
      zero[i] = 1;
      continue;
    }
    value[i] = bracket(a, letter, value[n.tail]);
    zero[i] = is_zero(value[i]) ? 1 : 0;
  }
  for (const auto& t : table.terms) {
    if (zero[t.node]) continue;
    if constexpr (ScalarTraits<S>::exact)
      axpy(r, t.coeff, value[t.node]);
    else
      axpy(r, t.coeff_d, value[t.node]);
  }
  return r;
}

template <class S>
Vec<S> group_commutator(const NilpotentAlgebra& a, const Vec<S>& x, const Vec<S>& y) {
  return bch_product(a, bch_product(a, bch_product(a, x, y), neg(x)), neg(y));
}

template <class S>
Vec<S> product_of(const NilpotentAlgebra& a, const std::vector<Vec<S>>& factors) {
  Vec<S> r(a.dim(), S(0));
  for (const auto& f : factors) r = bch_product(a, r, f);
  return r;
}

template <class S>
Vec<S> dilation(const NilpotentAlgebra& a, const S& t, const Vec<S>& x) {
  a.check(x);
  std::vector<S> powers(static_cast<std::size_t>(a.step()) + 1, S(1));
  for (std::size_t k = 1; k < powers.size(); ++k) powers[k] = powers[k - 1] * t;
  Vec<S> r = x;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] *= powers[static_cast<std::size_t>(a.layer(i))];
  return r;
}

template <class S>
Vec<S> delta_minus_one(const NilpotentAlgebra& a, const Vec<S>& x) {
  return dilation(a, S(-1), x);
}

template <class S>
Vec<S> scaled_product(const NilpotentAlgebra& a, const S& t, const Vec<S>& x, const Vec<S>& y) {
  if (!(t > 0)) throw Error("domain", "scaled_product requires t > 0");
  const S inv = S(1) / t;
  return dilation(a, inv, bch_product(a, dilation(a, t, x), dilation(a, t, y)));
}

template <class S>
Vec<S> asymptotic_bracket(const NilpotentAlgebra& a, const Vec<S>& x, const Vec<S>& y) {
  a.check(x);
  a.check(y);
  const std::size_t n = a.dim();
  Vec<S> r(n, S(0));
  for (std::size_t i = 0; i < n; ++i) {
    if (ScalarTraits<S>::is_zero(x[i])) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || ScalarTraits<S>::is_zero(y[j])) continue;
      const int target = a.layer(i) + a.layer(j);
      for (const auto& t : a.structure(i, j))
        if (a.layer(t.index) == target) r[t.index] += x[i] * y[j] * from_rational<S>(t.coeff);
    }
  }
  return r;
}

template <class S>
Vec<S> scaled_bracket(const NilpotentAlgebra& a, const S& t, const Vec<S>& x, const Vec<S>& y) {
  if (!(t > 0)) throw Error("domain", "scaled_bracket requires t > 0");
  const S inv = S(1) / t;
  return dilation(a, inv, bracket(a, dilation(a, t, x), dilation(a, t, y)));
}

template <class S>
Vec<S> asymptotic_product(const NilpotentAlgebra& a, const Vec<S>& x, const Vec<S>& y) {
  if (a.is_graded()) return bch_product(a, x, y);
  return bch_product(asymptotic_algebra(a), x, y);
}

template <class S>
Vec<S> beta_residual(const NilpotentAlgebra& a, const S& t, const Vec<S>& x, const Vec<S>& y) {
  return sub(scaled_product(a, t, x, y), asymptotic_product(a, x, y));
}

template <class S>
Vec<S> alpha_residual(const NilpotentAlgebra& a, const S& t, const Vec<S>& x, const Vec<S>& y) {
  return sub(scaled_bracket(a, t, x, y), asymptotic_bracket(a, x, y));
}

BetaCertificate certify_beta_constant(const NilpotentAlgebra& a,
                                      const std::vector<std::pair<QVec, QVec>>& pairs,
                                      const std::vector<Rational>& t_values) {
  BetaCertificate cert;
  const NilpotentAlgebra asym = asymptotic_algebra(a);
  const int d = a.step();
  for (const auto& [x, y] : pairs) {
    const QVec limit = bch_product(asym, x, y);
    const double nx = norm(x), ny = norm(y);
    const double weight = (nx + std::pow(nx, d)) * (ny + std::pow(ny, d));
    for (const auto& t : t_values) {
      if (sgn(t) <= 0) throw Error("domain", "beta constant requires t > 0");
      const QVec res = sub(scaled_product(a, t, x, y), limit);
      const double rn = norm(res);
      const double td = t.get_d();
      double ratio = 0;
      if (rn > 0) {
        if (weight > 0) {
          ratio = td * rn / weight;
        } else {
          cert.finite = false;
          ratio = INFINITY;
        }
      }
      cert.constant = std::max(cert.constant, ratio);
      cert.samples.push_back({td, rn, ratio});
    }
  }
  if (!std::isfinite(cert.constant)) cert.finite = false;
  return cert;
}

#define NILCC_INSTANTIATE(S)                                                                   \
  template Vec<S> bch_product(const NilpotentAlgebra&, const Vec<S>&, const Vec<S>&);          \
  template Vec<S> group_commutator(const NilpotentAlgebra&, const Vec<S>&, const Vec<S>&);     \
  template Vec<S> product_of(const NilpotentAlgebra&, const std::vector<Vec<S>>&);             \
  template Vec<S> dilation(const NilpotentAlgebra&, const S&, const Vec<S>&);                  \
  template Vec<S> delta_minus_one(const NilpotentAlgebra&, const Vec<S>&);                     \
  template Vec<S> scaled_product(const NilpotentAlgebra&, const S&, const Vec<S>&, const Vec<S>&); \
  template Vec<S> asymptotic_bracket(const NilpotentAlgebra&, const Vec<S>&, const Vec<S>&);   \
  template Vec<S> scaled_bracket(const NilpotentAlgebra&, const S&, const Vec<S>&, const Vec<S>&); \
  template Vec<S> asymptotic_product(const NilpotentAlgebra&, const Vec<S>&, const Vec<S>&);   \
  template Vec<S> beta_residual(const NilpotentAlgebra&, const S&, const Vec<S>&, const Vec<S>&); \
  template Vec<S> alpha_residual(const NilpotentAlgebra&, const S&, const Vec<S>&, const Vec<S>&);

NILCC_INSTANTIATE(Rational)
NILCC_INSTANTIATE(double)
#undef NILCC_INSTANTIATE

}  // namespace nilcc
