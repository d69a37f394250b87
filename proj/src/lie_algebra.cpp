#include "nilcc/lie_algebra.hpp"

#include <algorithm>
#include <map>

#include "nilcc/linalg.hpp"

namespace nilcc {

namespace {

SparseVec to_sparse(const QVec& v) {
  SparseVec out;
  for (std::size_t k = 0; k < v.size(); ++k)
    if (sgn(v[k]) != 0) out.push_back({k, v[k]});
  return out;
}

QVec to_dense(const SparseVec& s, std::size_t n) {
  QVec v(n, Rational(0));
  for (const auto& t : s) v.at(t.index) += t.coeff;
  return v;
}

SparseVec negated(const SparseVec& s) {
  SparseVec out = s;
  for (auto& t : out) t.coeff = -t.coeff;
  return out;
}

bool same(const SparseVec& a, const SparseVec& b, std::size_t n) { return to_dense(a, n) == to_dense(b, n); }

}  // namespace

NilpotentAlgebra::NilpotentAlgebra(std::vector<int> layers, const std::vector<Entry>& entries,
                                   std::vector<std::string> labels, std::vector<Word> hall_words)
    : layers_(std::move(layers)), labels_(std::move(labels)), hall_words_(std::move(hall_words)) {
  const std::size_t n = layers_.size();
  if (n == 0) throw Error("invalid_algebra", "algebra must have positive dimension");
  for (std::size_t i = 0; i < n; ++i) {
    if (layers_[i] < 1) throw Error("invalid_algebra", "layers must be >= 1");
    if (i > 0 && layers_[i] < layers_[i - 1])
      throw Error("invalid_algebra", "basis must be sorted by nondecreasing layer");
  }
  if (layers_.front() != 1) throw Error("invalid_algebra", "layer 1 must be nonempty");
  step_ = layers_.back();
  if (labels_.empty()) {
    for (std::size_t i = 0; i < n; ++i) labels_.push_back("b" + std::to_string(i + 1));
  }
  if (labels_.size() != n) throw Error("invalid_algebra", "label count does not match dimension");

  table_.assign(n * n, {});
  std::vector<bool> set(n * n, false);
  for (const auto& e : entries) {
    if (e.i >= n || e.j >= n) throw Error("invalid_algebra", "structure constant index out of range");
    for (const auto& t : e.value)
      if (t.index >= n) throw Error("invalid_algebra", "structure constant target out of range");
    SparseVec v = to_sparse(to_dense(e.value, n));
    if (e.i == e.j) {
      if (!v.empty()) throw Error("invalid_algebra", "[b_i, b_i] must vanish");
      continue;
    }
    const std::size_t ij = e.i * n + e.j, ji = e.j * n + e.i;
    if (set[ij] && !same(table_[ij], v, n))
      throw Error("invalid_algebra", "conflicting structure constants for one pair");
    if (set[ji] && !same(table_[ji], negated(v), n))
      throw Error("invalid_algebra", "structure constants are not antisymmetric");
    table_[ij] = v;
    table_[ji] = negated(v);
    set[ij] = set[ji] = true;
  }
  table_d_.resize(n * n);
  for (std::size_t p = 0; p < n * n; ++p)
    for (const auto& t : table_[p]) table_d_[p].emplace_back(t.index, t.coeff.get_d());
}

std::vector<std::size_t> NilpotentAlgebra::layer_indices(int k) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < dim(); ++i)
    if (layers_[i] == k) out.push_back(i);
  return out;
}

std::vector<NilpotentAlgebra::Entry> NilpotentAlgebra::entries() const {
  std::vector<Entry> out;
  for (std::size_t i = 0; i < dim(); ++i)
    for (std::size_t j = i + 1; j < dim(); ++j)
      if (!structure(i, j).empty()) out.push_back({i, j, structure(i, j)});
  return out;
}

bool NilpotentAlgebra::is_graded() const {
  for (std::size_t i = 0; i < dim(); ++i)
    for (std::size_t j = 0; j < dim(); ++j)
      for (const auto& t : structure(i, j))
        if (layers_[t.index] != layers_[i] + layers_[j]) return false;
  return true;
}

template <class S>
Vec<S> bracket(const NilpotentAlgebra& a, const Vec<S>& x, const Vec<S>& y) {
  a.check(x);
  a.check(y);
  const std::size_t n = a.dim();
  Vec<S> r(n, S(0));
  std::vector<std::size_t> nx, ny;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ScalarTraits<S>::is_zero(x[i])) nx.push_back(i);
    if (!ScalarTraits<S>::is_zero(y[i])) ny.push_back(i);
  }
  for (std::size_t i : nx) {
    for (std::size_t j : ny) {
      if (i == j) continue;
      if constexpr (ScalarTraits<S>::exact) {
        const auto& st = a.structure(i, j);
        if (st.empty()) continue;
        const S xy = x[i] * y[j];
        for (const auto& t : st) r[t.index] += xy * t.coeff;
      } else {
        const auto& st = a.structure_d(i, j);
        if (st.empty()) continue;
        const double xy = x[i] * y[j];
        for (const auto& [k, c] : st) r[k] += xy * c;
      }
    }
  }
  return r;
}

template <class S>
std::vector<Vec<S>> decompose(const NilpotentAlgebra& a, const Vec<S>& x) {
  a.check(x);
  std::vector<Vec<S>> parts(static_cast<std::size_t>(a.step()), Vec<S>(a.dim(), S(0)));
  for (std::size_t i = 0; i < a.dim(); ++i) parts[static_cast<std::size_t>(a.layer(i) - 1)][i] = x[i];
  return parts;
}

template <class S>
Vec<S> layer_part(const NilpotentAlgebra& a, const Vec<S>& x, int k) {
  a.check(x);
  Vec<S> r(a.dim(), S(0));
  for (std::size_t i = 0; i < a.dim(); ++i)
    if (a.layer(i) == k) r[i] = x[i];
  return r;
}

template <class S>
Vec<S> LinearMap::apply(const Vec<S>& x) const {
  if (x.size() != in_dim()) throw Error("algebra_mismatch", "LinearMap::apply: dimension mismatch");
  Vec<S> r(out_dim(), S(0));
  for (std::size_t i = 0; i < out_dim(); ++i)
    for (std::size_t j = 0; j < in_dim(); ++j)
      if (sgn(rows[i][j]) != 0 && !ScalarTraits<S>::is_zero(x[j])) r[i] += from_rational<S>(rows[i][j]) * x[j];
  return r;
}

template QVec bracket(const NilpotentAlgebra&, const QVec&, const QVec&);
template DVec bracket(const NilpotentAlgebra&, const DVec&, const DVec&);
template std::vector<QVec> decompose(const NilpotentAlgebra&, const QVec&);
template std::vector<DVec> decompose(const NilpotentAlgebra&, const DVec&);
template QVec layer_part(const NilpotentAlgebra&, const QVec&, int);
template DVec layer_part(const NilpotentAlgebra&, const DVec&, int);
template QVec LinearMap::apply(const QVec&) const;
template DVec LinearMap::apply(const DVec&) const;

// ---------------------------------------------------------------------------
// Free nilpotent algebras

namespace {

/// Decomposes a Lie polynomial into the Lyndon basis by repeatedly removing
/// the lexicographically smallest word of each degree (P(w) = w + larger words).
std::optional<QVec> lyndon_decompose(const std::vector<Word>& words, const std::vector<AssocPoly>& images,
                                     AssocPoly p) {
  std::map<Word, std::size_t> index;
  for (std::size_t i = 0; i < words.size(); ++i) index[words[i]] = i;
  QVec coords(words.size(), Rational(0));
  if (sgn(p.constant()) != 0) return std::nullopt;
  while (!p.is_zero()) {
    // smallest word of the smallest remaining degree
    const Word* best = nullptr;
    for (const auto& [w, c] : p.terms()) {
      if (!best || w.size() < best->size() || (w.size() == best->size() && w < *best)) best = &w;
    }
    Word w = *best;
    auto it = index.find(w);
    if (it == index.end()) return std::nullopt;
    const Rational c = p.coeff(w);
    coords[it->second] += c;
    AssocPoly t = images[it->second];
    t *= c;
    p -= t;
  }
  return coords;
}

}  // namespace

NilpotentAlgebra build_free_nilpotent(int generators, int step, std::size_t dimension_cap) {
  if (generators < 1) throw Error("precondition", "free algebra needs at least one generator");
  if (step < 1) throw Error("precondition", "free algebra needs step >= 1");
  // Count first so huge requests fail before any expansion work.
  std::size_t count = 0;
  {
    // Lyndon words of length k number (1/k) sum_{m|k} mu(m) l^{k/m}; count by enumeration guard.
    double estimate = 0;
    double lk = 1;
    for (int k = 1; k <= step; ++k) {
      lk *= generators;
      estimate += lk / k;
      if (estimate > 4.0 * static_cast<double>(dimension_cap) + 64)
        throw Error("too_large", "free algebra too large for desk scale (dimension cap " +
                                     std::to_string(dimension_cap) + ")");
    }
  }
  std::vector<Word> words = lyndon_words(generators, step);
  count = words.size();
  if (count > dimension_cap)
    throw Error("too_large", "free algebra of dimension " + std::to_string(count) + " exceeds cap " +
                                 std::to_string(dimension_cap));
  std::vector<AssocPoly> images;
  images.reserve(count);
  std::vector<int> layers;
  std::vector<std::string> labels;
  for (const auto& w : words) {
    images.push_back(lyndon_bracket(w, step));
    layers.push_back(static_cast<int>(w.size()));
    labels.push_back(lyndon_label(w));
  }
  std::vector<NilpotentAlgebra::Entry> entries;
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = i + 1; j < count; ++j) {
      if (layers[i] + layers[j] > step) continue;
      AssocPoly c = commutator(images[i], images[j]);
      auto coords = lyndon_decompose(words, images, c);
      if (!coords) throw Error("internal", "bracket of Hall elements left the Lyndon span");
      SparseVec v;
      for (std::size_t k = 0; k < count; ++k)
        if (sgn((*coords)[k]) != 0) v.push_back({k, (*coords)[k]});
      if (!v.empty()) entries.push_back({i, j, std::move(v)});
    }
  }
  return NilpotentAlgebra(std::move(layers), entries, std::move(labels), std::move(words));
}

std::optional<QVec> hall_coordinates(const NilpotentAlgebra& free_algebra, const AssocPoly& p) {
  if (!free_algebra.is_free()) throw Error("precondition", "hall_coordinates requires a free algebra");
  std::vector<AssocPoly> images;
  for (const auto& w : free_algebra.hall_words()) images.push_back(lyndon_bracket(w, free_algebra.step()));
  return lyndon_decompose(free_algebra.hall_words(), images, p);
}

AssocPoly tensor_image(const NilpotentAlgebra& free_algebra, const QVec& x) {
  if (!free_algebra.is_free()) throw Error("precondition", "tensor_image requires a free algebra");
  free_algebra.check(x);
  AssocPoly r(free_algebra.step());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (sgn(x[i]) == 0) continue;
    AssocPoly t = lyndon_bracket(free_algebra.hall_words()[i], free_algebra.step());
    t *= x[i];
    r += t;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Quotients

QuotientResult quotient(const NilpotentAlgebra& algebra, const std::vector<QVec>& relations) {
  const std::size_t n = algebra.dim();
  Echelon ideal(n);
  std::vector<QVec> pending;
  for (const auto& r : relations) {
    algebra.check(r);
    if (ideal.insert(r)) pending.push_back(r);
  }
  // Close under brackets with basis vectors.
  while (!pending.empty()) {
    QVec v = std::move(pending.back());
    pending.pop_back();
    for (std::size_t i = 0; i < n; ++i) {
      QVec w = bracket(algebra, unit<Rational>(n, i), v);
      if (is_zero(w)) continue;
      if (ideal.insert(w)) pending.push_back(std::move(w));
    }
  }
  if (ideal.rank() == n) throw Error("degenerate_quotient", "relations generate the whole algebra");

  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < n; ++j)
    if (!ideal.is_pivot(j)) kept.push_back(j);
  if (algebra.layer(kept.front()) != 1)
    throw Error("degenerate_quotient", "quotient has no layer-1 generators");
  const std::size_t m = kept.size();
  std::vector<std::size_t> position(n, m);
  for (std::size_t q = 0; q < m; ++q) position[kept[q]] = q;

  // b_p == -sum_{j nonpivot} row_p[j] b_j  modulo the ideal.
  LinearMap proj;
  proj.rows.assign(m, QVec(n, Rational(0)));
  for (std::size_t q = 0; q < m; ++q) proj.rows[q][kept[q]] = 1;
  const auto& rows = ideal.rows();
  const auto& pivots = ideal.pivots();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t j = 0; j < n; ++j) {
      if (position[j] == m || sgn(rows[r][j]) == 0) continue;
      proj.rows[position[j]][pivots[r]] = -rows[r][j];
    }
  }

  std::vector<int> layers;
  std::vector<std::string> labels;
  for (std::size_t j : kept) {
    layers.push_back(algebra.layer(j));
    labels.push_back(algebra.label(j));
  }
  std::vector<NilpotentAlgebra::Entry> entries;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      QVec br = to_dense(algebra.structure(kept[a], kept[b]), n);
      QVec img = proj.apply(br);
      SparseVec v = to_sparse(img);
      if (!v.empty()) entries.push_back({a, b, std::move(v)});
    }
  }
  return QuotientResult{NilpotentAlgebra(std::move(layers), entries, std::move(labels)), std::move(proj),
                        std::move(kept), ideal.rows()};
}

NilpotentAlgebra asymptotic_algebra(const NilpotentAlgebra& a) {
  std::vector<NilpotentAlgebra::Entry> entries;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    for (std::size_t j = i + 1; j < a.dim(); ++j) {
      SparseVec v;
      for (const auto& t : a.structure(i, j))
        if (a.layer(t.index) == a.layer(i) + a.layer(j)) v.push_back(t);
      if (!v.empty()) entries.push_back({i, j, std::move(v)});
    }
  }
  return NilpotentAlgebra(a.layers(), entries, a.labels(), a.hall_words());
}

FreeLift free_lift(const NilpotentAlgebra& a) {
  const auto gens = a.layer_indices(1);
  const int l = static_cast<int>(gens.size());
  const int d = a.step();
  NilpotentAlgebra f = build_free_nilpotent(l, d);
  const std::size_t n = a.dim();
  // image of each Hall basis vector, built from its standard factorization
  std::map<Word, QVec> image;
  for (int g = 0; g < l; ++g) image[Word(1, static_cast<char>(g))] = unit<Rational>(n, gens[g]);
  LinearMap proj;
  proj.rows.assign(n, QVec(f.dim(), Rational(0)));
  for (std::size_t c = 0; c < f.dim(); ++c) {
    const Word& w = f.hall_words()[c];
    if (w.size() > 1) {
      auto [u, v] = standard_factorization(w);
      image[w] = bracket(a, image.at(u), image.at(v));
    }
    const QVec& img = image.at(w);
    for (std::size_t r = 0; r < n; ++r) proj.rows[r][c] = img[r];
  }
  return FreeLift{std::move(f), std::move(proj)};
}

std::vector<QVec> derived_algebra_basis(const NilpotentAlgebra& a) {
  Echelon e(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = i + 1; j < a.dim(); ++j)
      if (!a.structure(i, j).empty()) e.insert(to_dense(a.structure(i, j), a.dim()));
  return e.rows();
}

VerifyReport verify_algebra(const NilpotentAlgebra& a) {
  VerifyReport rep;
  const std::size_t n = a.dim();
  auto fail = [&](std::string msg) {
    rep.ok = false;
    if (rep.violations.size() < 32) rep.violations.push_back(std::move(msg));
  };
  auto pair_name = [&](std::size_t i, std::size_t j) {
    return "(" + a.label(i) + ", " + a.label(j) + ")";
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (!a.structure(i, i).empty()) fail("nonzero self-bracket at " + a.label(i));
    for (std::size_t j = i + 1; j < n; ++j) {
      QVec ij = to_dense(a.structure(i, j), n), ji = to_dense(a.structure(j, i), n);
      if (add(ij, ji) != QVec(n, Rational(0))) fail("antisymmetry fails at " + pair_name(i, j));
      for (const auto& t : a.structure(i, j)) {
        if (a.layer(t.index) < a.layer(i) + a.layer(j)) {
          fail("filtration fails: [N^" + std::to_string(a.layer(i)) + ", N^" + std::to_string(a.layer(j)) +
               "] not inside N^" + std::to_string(a.layer(i) + a.layer(j)) + " at " + pair_name(i, j));
          break;
        }
      }
    }
  }
  // Jacobi: [x,[y,z]] + [y,[z,x]] + [z,[x,y]] = 0 on basis triples.
  std::vector<QVec> basis;
  for (std::size_t i = 0; i < n; ++i) basis.push_back(unit<Rational>(n, i));
  std::vector<QVec> br(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) br[i * n + j] = to_dense(a.structure(i, j), n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        if (a.layer(i) + a.layer(j) + a.layer(k) > a.step() && a.is_graded()) continue;
        QVec s = bracket(a, basis[i], br[j * n + k]);
        s = add(s, bracket(a, basis[j], br[k * n + i]));
        s = add(s, bracket(a, basis[k], br[i * n + j]));
        if (!is_zero(s)) {
          if (!rep.jacobi_witness) rep.jacobi_witness = std::array<std::size_t, 3>{i, j, k};
          fail("Jacobi fails at (" + a.label(i) + ", " + a.label(j) + ", " + a.label(k) + ")");
        }
      }
    }
  }
  // The declared filtration must be the lower central series: N^{k+1} = [N, N^k].
  for (int k = 1; k < a.step(); ++k) {
    Echelon e(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (a.layer(j) >= k) e.insert(br[i * n + j]);
    std::size_t expected = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (a.layer(i) >= k + 1) ++expected;
    if (e.rank() != expected)
      fail("lower central series mismatch: dim [N, N^" + std::to_string(k) + "] = " + std::to_string(e.rank()) +
           " but declared N^" + std::to_string(k + 1) + " has dim " + std::to_string(expected));
  }
  // N^{d+1} = 0 means brackets with N^d vanish.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (a.layer(j) == a.step() && !a.structure(i, j).empty()) {
        fail("top layer is not central at " + pair_name(i, j));
        i = n;
        break;
      }
  return rep;
}

}  // namespace nilcc
