#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "grid.hpp"

namespace amalgam {

using MultiIndex = std::array<int, 2>;

inline int order(const MultiIndex& b) { return b[0] + b[1]; }

/// Number of multi-indices with |beta| <= k in dimension d (= dim P_k).
inline int multi_count(int dim, int k) { return dim == 1 ? k + 1 : (k + 1) * (k + 2) / 2; }

/// Position of beta in the graded ordering used by multi_indices().
inline int multi_position(int dim, const MultiIndex& b) {
  if (dim == 1) return b[0];
  int n = order(b);
  return n * (n + 1) / 2 + b[1];
}

/// All beta with |beta| <= k, graded by total order.
inline std::vector<MultiIndex> multi_indices(int dim, int k) {
  std::vector<MultiIndex> out;
  for (int n = 0; n <= k; ++n) {
    if (dim == 1) {
      out.push_back({n, 0});
    } else {
      for (int b1 = 0; b1 <= n; ++b1) out.push_back({n - b1, b1});
    }
  }
  return out;
}

inline double factorial(int n) {
  double f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

inline double multi_factorial(const MultiIndex& b) { return factorial(b[0]) * factorial(b[1]); }

inline double monomial(const Point& y, const MultiIndex& b, int dim) {
  double v = std::pow(y[0], b[0]);
  if (dim == 2) v *= std::pow(y[1], b[1]);
  return v;
}

}  // namespace amalgam
