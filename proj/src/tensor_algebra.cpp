#include "nilcc/tensor_algebra.hpp"

#include <algorithm>
#include <functional>

namespace nilcc {

AssocPoly AssocPoly::letter(int max_degree, int i) {
  AssocPoly p(max_degree);
  if (max_degree >= 1) p.terms_[Word(1, static_cast<char>(i))] = 1;
  return p;
}

AssocPoly AssocPoly::scalar(int max_degree, const Rational& c) {
  AssocPoly p(max_degree);
  if (sgn(c) != 0) p.terms_[Word{}] = c;
  return p;
}

Rational AssocPoly::coeff(const Word& w) const {
  auto it = terms_.find(w);
  return it == terms_.end() ? Rational(0) : it->second;
}

void AssocPoly::add_term(const Word& w, const Rational& c) {
  if (static_cast<int>(w.size()) > max_degree_ || sgn(c) == 0) return;
  auto [it, inserted] = terms_.try_emplace(w, c);
  if (!inserted) {
    it->second += c;
    if (sgn(it->second) == 0) terms_.erase(it);
  }
}

AssocPoly& AssocPoly::operator+=(const AssocPoly& o) {
  max_degree_ = std::max(max_degree_, o.max_degree_);
  for (const auto& [w, c] : o.terms_) add_term(w, c);
  return *this;
}

AssocPoly& AssocPoly::operator-=(const AssocPoly& o) {
  max_degree_ = std::max(max_degree_, o.max_degree_);
  for (const auto& [w, c] : o.terms_) add_term(w, -c);
  return *this;
}

AssocPoly& AssocPoly::operator*=(const Rational& c) {
  if (sgn(c) == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [w, v] : terms_) v *= c;
  return *this;
}

AssocPoly operator*(const AssocPoly& a, const AssocPoly& b) {
  AssocPoly r(std::min(a.max_degree_, b.max_degree_));
  for (const auto& [wa, ca] : a.terms_) {
    for (const auto& [wb, cb] : b.terms_) {
      if (static_cast<int>(wa.size() + wb.size()) > r.max_degree_) continue;
      r.add_term(wa + wb, ca * cb);
    }
  }
  return r;
}

AssocPoly AssocPoly::part(int degree) const {
  AssocPoly r(max_degree_);
  for (const auto& [w, c] : terms_)
    if (static_cast<int>(w.size()) == degree) r.terms_[w] = c;
  return r;
}

AssocPoly commutator(const AssocPoly& a, const AssocPoly& b) { return a * b - b * a; }

AssocPoly exp_series(const AssocPoly& x) {
  if (sgn(x.constant()) != 0) throw Error("domain", "exp_series: nonzero constant term");
  const int d = x.max_degree();
  AssocPoly result = AssocPoly::scalar(d, 1);
  AssocPoly power = AssocPoly::scalar(d, 1);
  for (int n = 1; n <= d; ++n) {
    power = power * x;
    power *= Rational(1, n);
    if (power.is_zero()) break;
    result += power;
  }
  return result;
}

AssocPoly log_series(const AssocPoly& x) {
  if (x.constant() != 1) throw Error("domain", "log_series: constant term must be 1");
  const int d = x.max_degree();
  AssocPoly y = x - AssocPoly::scalar(d, 1);
  AssocPoly result(d);
  AssocPoly power = AssocPoly::scalar(d, 1);
  for (int n = 1; n <= d; ++n) {
    power = power * y;
    if (power.is_zero()) break;
    AssocPoly term = power;
    term *= Rational(n % 2 == 1 ? 1 : -1, n);
    result += term;
  }
  return result;
}

bool is_lyndon(const Word& w) {
  if (w.empty()) return false;
  for (std::size_t i = 1; i < w.size(); ++i)
    if (!(w < w.substr(i))) return false;
  return true;
}

std::vector<Word> lyndon_words(int letters, int max_length) {
  std::vector<Word> out;
  if (letters < 1 || max_length < 1) return out;
  // Duval's generation in lexicographic order.
  Word w(1, static_cast<char>(0));
  while (!w.empty()) {
    out.push_back(w);
    const std::size_t m = w.size();
    while (static_cast<int>(w.size()) < max_length) w.push_back(w[w.size() - m]);
    while (!w.empty() && w.back() == static_cast<char>(letters - 1)) w.pop_back();
    if (!w.empty()) ++w.back();
  }
  std::stable_sort(out.begin(), out.end(), [](const Word& a, const Word& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return out;
}

std::pair<Word, Word> standard_factorization(const Word& w) {
  for (std::size_t i = 1; i < w.size(); ++i) {
    Word v = w.substr(i);
    if (is_lyndon(v)) return {w.substr(0, i), v};
  }
  throw Error("domain", "standard_factorization: word has length < 2");
}

AssocPoly lyndon_bracket(const Word& w, int max_degree) {
  if (w.size() == 1) return AssocPoly::letter(max_degree, w[0]);
  auto [u, v] = standard_factorization(w);
  return commutator(lyndon_bracket(u, max_degree), lyndon_bracket(v, max_degree));
}

std::string lyndon_label(const Word& w) {
  if (w.size() == 1) return std::to_string(static_cast<int>(w[0]) + 1);
  auto [u, v] = standard_factorization(w);
  return "[" + lyndon_label(u) + "," + lyndon_label(v) + "]";
}

}  // namespace nilcc
