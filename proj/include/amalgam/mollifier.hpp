#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "multi_index.hpp"

namespace amalgam {

/// exp(-1/(1-s)) for s = |x|^2 < 1, else 0.
inline double bump_profile(double s) { return s < 1 ? std::exp(-1.0 / (1.0 - s)) : 0.0; }

/// c_d with c_d * int exp(-1/(1-|x|^2)) dx = 1.
inline double bump_constant(int dim) {
  using boost::math::quadrature::gauss_kronrod;
  static const double c1 = [] {
    auto f = [](double x) { return bump_profile(x * x); };
    return 1.0 / gauss_kronrod<double, 61>::integrate(f, -1.0, 1.0, 20, 1e-15);
  }();
  static const double c2 = [] {
    // polar coordinates with s = r^2: 2 pi r dr = pi ds
    auto f = [](double s) { return bump_profile(s); };
    return 1.0 / (std::numbers::pi * gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 20, 1e-15));
  }();
  return dim == 1 ? c1 : c2;
}

/// The standard mollifier, supported in the open unit ball, unit mass.
inline double bump(const Point& x, int dim) {
  double s = x[0] * x[0] + (dim == 2 ? x[1] * x[1] : 0.0);
  return bump_constant(dim) * bump_profile(s);
}

/// Taylor coefficients of the standard mollifier at y, graded up to total order k.
inline std::vector<double> bump_taylor(const Point& y, int dim, int k) {
  const int m = multi_count(dim, k);
  std::vector<double> out(m, 0.0);
  double s0 = y[0] * y[0] + (dim == 2 ? y[1] * y[1] : 0.0);
  double tau = 1.0 - s0;
  if (tau <= 1.0 / 700.0) return out;  // exp underflows below this

  // univariate series of exp(-1/(tau - w)) in w
  std::vector<double> u(k + 1), e(k + 1);
  for (int j = 0; j <= k; ++j) u[j] = -std::pow(tau, -(j + 1));
  e[0] = std::exp(u[0]);
  for (int j = 1; j <= k; ++j) {
    double acc = 0;
    for (int i = 1; i <= j; ++i) acc += i * u[i] * e[j - i];
    e[j] = acc / j;
  }

  // compose with w(delta) = 2 y.delta + |delta|^2 by Horner
  auto idx = multi_indices(dim, k);
  std::vector<double> r(m, 0.0), next(m);
  r[0] = e[k];
  for (int j = k - 1; j >= 0; --j) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int p = 0; p < m; ++p) {
      const auto& g = idx[p];
      double acc = 0;
      for (int a = 0; a < dim; ++a) {
        MultiIndex g1 = g, g2 = g;
        if (g[a] >= 1) {
          g1[a] -= 1;
          acc += 2 * y[a] * r[multi_position(dim, g1)];
        }
        if (g[a] >= 2) {
          g2[a] -= 2;
          acc += r[multi_position(dim, g2)];
        }
      }
      next[p] = acc;
    }
    next[0] += e[j];
    r.swap(next);
  }
  double c = bump_constant(dim);
  for (int p = 0; p < m; ++p) out[p] = c * r[p];
  return out;
}

/// All partial derivatives d^gamma phi(y), |gamma| <= k, graded order.
inline std::vector<double> bump_derivatives(const Point& y, int dim, int k) {
  auto t = bump_taylor(y, dim, k);
  auto idx = multi_indices(dim, k);
  for (std::size_t p = 0; p < t.size(); ++p) t[p] *= multi_factorial(idx[p]);
  return t;
}

inline double bump_derivative(const Point& y, int dim, const MultiIndex& gamma) {
  auto t = bump_taylor(y, dim, order(gamma));
  return t[multi_position(dim, gamma)] * multi_factorial(gamma);
}

}  // namespace amalgam
