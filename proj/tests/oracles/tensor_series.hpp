#pragma once

// Truncated tensor algebra on words, kept separate from the library: exp and
// log by their power series, so log(exp X exp Y) can be compared with the
// library's group law through the embedding of Hall coordinates.

#include <gmpxx.h>

#include <map>
#include <string>

namespace oracle {

using Word = std::string;  // letters are generator indices as chars
using Series = std::map<Word, mpq_class>;

inline Series mul(const Series& a, const Series& b, std::size_t degree) {
  Series r;
  for (const auto& [u, cu] : a)
    for (const auto& [v, cv] : b) {
      if (u.size() + v.size() > degree) continue;
      r[u + v] += cu * cv;
    }
  std::erase_if(r, [](const auto& kv) { return kv.second == 0; });
  return r;
}

inline void add_to(Series& a, const Series& b, const mpq_class& c) {
  for (const auto& [w, x] : b) a[w] += c * x;
  std::erase_if(a, [](const auto& kv) { return kv.second == 0; });
}

/// X has no constant term.
inline Series exp_series(const Series& x, std::size_t degree) {
  Series r{{Word{}, 1}};
  Series term{{Word{}, 1}};
  for (std::size_t k = 1; k <= degree; ++k) {
    Series next;
    add_to(next, mul(term, x, degree), mpq_class(1, k));  // x^k / k!
    term = next;
    add_to(r, term, 1);
  }
  return r;
}

/// log(1 + Z) for Z without constant term.
inline Series log_series(const Series& one_plus_z, std::size_t degree) {
  Series z = one_plus_z;
  z.erase(Word{});
  Series r, power{{Word{}, 1}};
  for (std::size_t k = 1; k <= degree; ++k) {
    power = mul(power, z, degree);
    add_to(r, power, mpq_class(k % 2 ? 1 : -1, k));
  }
  return r;
}

inline Series bch(const Series& x, const Series& y, std::size_t degree) {
  return log_series(mul(exp_series(x, degree), exp_series(y, degree), degree), degree);
}

}  // namespace oracle
