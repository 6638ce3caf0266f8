#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "grid.hpp"

namespace amalgam {

/// Space parameters (q, p, r, delta, eta, N).
struct ExponentConfig {
  double q = 1.0;
  double p = 1.0;
  double r = inf;
  int delta = -1;  ///< negative: smallest admissible
  double eta = -1;  ///< negative: q / 2
  int N = -1;       ///< negative: smallest admissible

  static int min_delta(int dim, double q) {
    return std::max(0, static_cast<int>(std::floor(dim * (1.0 / q - 1.0) + 1e-9)));
  }
  static int min_order(int dim, double q, double p) {
    return static_cast<int>(std::max(std::floor(dim / q + 1e-9), std::floor(dim / p + 1e-9))) + 1;
  }

  /// Fills defaulted fields and checks the standing constraints.
  ExponentConfig resolved(int dim) const {
    ExponentConfig c = *this;
    require(q > 0 && std::isfinite(q), "q must lie in (0, inf)");
    require(p > 0 && std::isfinite(p), "p must lie in (0, inf)");
    require(r > 1, "r must lie in (1, inf]");
    if (c.delta < 0) c.delta = min_delta(dim, q);
    if (c.N < 0) c.N = min_order(dim, q, p);
    if (c.eta < 0) c.eta = std::min(1.0, q) / 2;
    require(c.delta >= min_delta(dim, q), "delta must be at least floor(d(1/q - 1))");
    require(c.N >= min_order(dim, q, p), "N must exceed max(d/q, d/p)");
    require(c.eta > 0 && c.eta <= 1, "eta must lie in (0, 1]");
    return c;
  }

  /// Extra constraints for atomic decompositions and reconstructions.
  void require_atomic() const {
    require(q <= 1, "atomic work needs q <= 1");
    require(q <= p, "atomic work needs q <= p");
    if (std::isfinite(r)) {
      require(r > std::max(p, 1.0), "finite r needs r > max(p, 1)");
      require(eta < q, "finite r needs eta < q");
    }
  }
};

/// log of ||f chi_{Q_k}||_q for every lattice cube in the window (-inf if zero).
template <class T>
std::vector<double> cube_log_norms(const BasicField<T>& f, double q) {
  require(q > 0, "cube norms need q > 0");
  const auto& g = f.grid();
  const int cubes = 2 * g.half_width;
  const std::size_t count = g.dim == 1 ? cubes : static_cast<std::size_t>(cubes) * cubes;
  std::vector<double> acc(count, 0.0);
  const bool sup = std::isinf(q);
  for (std::size_t c = 0; c < f.size(); ++c) {
    double a = modulus(f[c]);
    if (a == 0) continue;
    auto [i0, i1] = g.index(c);
    std::size_t k = g.dim == 1 ? i0 / g.per_unit
                               : static_cast<std::size_t>(i0 / g.per_unit) * cubes + i1 / g.per_unit;
    if (sup)
      acc[k] = std::max(acc[k], a);
    else
      acc[k] += std::pow(a, q);
  }
  std::vector<double> out(count);
  const double logvol = std::log(g.cell_volume());
  for (std::size_t k = 0; k < count; ++k) {
    if (acc[k] <= 0)
      out[k] = -inf;
    else
      out[k] = sup ? std::log(acc[k]) : (std::log(acc[k]) + logvol) / q;
  }
  return out;
}

/// log of the l^p combination of values given by their logs.
inline double log_lp_combine(const std::vector<double>& logs, double p) {
  double m = -inf;
  for (double l : logs) m = std::max(m, l);
  if (std::isinf(p) || m == -inf) return m;
  double s = 0;
  for (double l : logs)
    if (l > -inf) s += std::exp(p * (l - m));
  return m + std::log(s) / p;
}

/// Wiener amalgam quasi-norm ||f||_{q,p} over the window lattice cubes.
template <class T>
double amalgam_norm(const BasicField<T>& f, double q, double p) {
  require(p > 0, "amalgam norm needs p > 0");
  double l = log_lp_combine(cube_log_norms(f, q), p);
  return l == -inf ? 0.0 : std::exp(l);
}

struct EmbeddingReport {
  double norm_q_p = 0;   ///< ||f||_{q,p}
  double norm_q_p1 = 0;  ///< ||f||_{q,p1}
  double norm_q1_p = 0;  ///< ||f||_{q1,p}
  bool sequence_embedding = true;  ///< ||f||_{q,p1} <= ||f||_{q,p}
  bool local_embedding = true;     ///< ||f||_{q,p} <= ||f||_{q1,p}
  bool holds() const { return sequence_embedding && local_embedding; }
};

template <class T>
EmbeddingReport embedding_check(const BasicField<T>& f, double q, double p, double q1, double p1,
                                double rel_tol = 1e-12) {
  require(p <= p1, "embedding check needs p <= p1");
  require(q <= q1, "embedding check needs q <= q1");
  EmbeddingReport r;
  r.norm_q_p = amalgam_norm(f, q, p);
  r.norm_q_p1 = amalgam_norm(f, q, p1);
  r.norm_q1_p = amalgam_norm(f, q1, p);
  r.sequence_embedding = r.norm_q_p1 <= r.norm_q_p * (1 + rel_tol);
  r.local_embedding = r.norm_q_p <= r.norm_q1_p * (1 + rel_tol);
  return r;
}

struct ReverseMinkowskiReport {
  double sum_of_norms = 0;  ///< sum_n ||f_n||_{q,p}
  double norm_of_sum = 0;   ///< || sum_n |f_n| ||_{q,p}
  bool holds = true;
};

template <class T>
ReverseMinkowskiReport reverse_minkowski_check(const std::vector<BasicField<T>>& fs, double q,
                                               double p, double rel_tol = 1e-12) {
  require(q < 1, "reverse Minkowski needs q < 1");
  require(p <= 1, "reverse Minkowski needs p <= 1");
  ReverseMinkowskiReport r;
  if (fs.empty()) return r;
  Field total(fs.front().grid());
  for (const auto& f : fs) {
    r.sum_of_norms += amalgam_norm(f, q, p);
    for (std::size_t i = 0; i < f.size(); ++i) total[i] += modulus(f[i]);
  }
  r.norm_of_sum = amalgam_norm(total, q, p);
  r.holds = r.sum_of_norms <= r.norm_of_sum * (1 + rel_tol);
  return r;
}

}  // namespace amalgam
