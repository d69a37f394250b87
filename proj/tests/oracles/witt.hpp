#pragma once

// Necklace-counting formula for the layer dimensions of a free Lie algebra.

#include <cstddef>

namespace oracle {

inline int mobius(int n) {
  int result = 1;
  for (int p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    n /= p;
    if (n % p == 0) return 0;
    result = -result;
  }
  return n > 1 ? -result : result;
}

inline long ipow(long b, int e) {
  long r = 1;
  while (e-- > 0) r *= b;
  return r;
}

/// (1/k) sum_{m | k} mu(m) l^{k/m}
inline long free_layer_dim(int l, int k) {
  long s = 0;
  for (int m = 1; m <= k; ++m)
    if (k % m == 0) s += mobius(m) * ipow(l, k / m);
  return s / k;
}

inline long free_dim(int l, int d) {
  long s = 0;
  for (int k = 1; k <= d; ++k) s += free_layer_dim(l, k);
  return s;
}

}  // namespace oracle
