#pragma once

#include <random>
#include <string>

#include "nilcc/lie_algebra.hpp"

namespace testing_support {

using namespace nilcc;

/// Random exact vector with small numerators and denominators.
inline QVec random_qvec(std::mt19937_64& rng, std::size_t n, int range = 5, int den = 4) {
  std::uniform_int_distribution<int> num(-range, range), d(1, den);
  QVec v(n);
  for (auto& c : v) {
    c = Rational(num(rng), d(rng));
    c.canonicalize();
  }
  return v;
}

inline std::size_t index_of(const NilpotentAlgebra& a, const std::string& label) {
  for (std::size_t i = 0; i < a.dim(); ++i)
    if (a.label(i) == label) return i;
  throw Error("internal", "no basis vector labelled " + label);
}

/// free(2,4) modulo the ideal generated by [[1,2],2] + [1,[1,[1,2]]]: the
/// relation mixes layers 3 and 4, so the quotient is not graded.
inline NilpotentAlgebra nongraded_quotient() {
  const NilpotentAlgebra f = build_free_nilpotent(2, 4);
  QVec r = zeros<Rational>(f.dim());
  r[index_of(f, "[[1,2],2]")] = 1;
  r[index_of(f, "[1,[1,[1,2]]]")] = 1;
  return quotient(f, {r}).algebra;
}

}  // namespace testing_support
