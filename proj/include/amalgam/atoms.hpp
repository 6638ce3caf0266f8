#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "maximal.hpp"
#include "polynomial.hpp"

namespace amalgam {

/// A (q, r, delta) atom: `profile / scale` supported in `cube`.
///
/// Keeping the profile and scale separate lets a decomposition carry
/// lambda = scale and reproduce `profile` exactly when resummed.
struct Atom {
  GridSpec grid;
  Cube cube;
  Patch profile;
  double scale = 1;
  double q = 1;
  double r = inf;
  int delta = 0;
  bool local = true;

  bool moments_required() const { return !local || cube.measure() < 1; }
  Field field() const { return profile.to_field(grid, 1.0 / scale); }
  /// Size bound |Q|^{1/r - 1/q}.
  double size_bound() const {
    double inv_r = std::isinf(r) ? 0.0 : 1.0 / r;
    return std::pow(cube.measure(), inv_r - 1.0 / q);
  }
};

inline Atom make_atom_from(const Field& f, const Cube& cube, double q, double r, int delta, bool local) {
  return {f.grid(), cube, support_patch(f), 1.0, q, r, delta, local};
}

/// Moments of `values` on `cells` against ((x - x_Q)/l_Q)^beta, |beta| <= delta.
inline std::vector<double> centered_moments(const GridSpec& g, const Patch& p, double factor,
                                            const Cube& q, int delta) {
  Patch w{p.cells, std::vector<double>(p.size(), factor)};
  return weighted_moments(g, p.values, w, delta, q.center(), q.side);
}

struct AtomReport {
  bool support_ok = true;
  bool size_ok = true;
  bool moments_required = false;
  bool moments_ok = true;
  double size_ratio = 0;     ///< ||a||_{L^r(Q)} / |Q|^{1/r - 1/q}
  double worst_moment = 0;   ///< max |int a (x - x_Q)^beta dx|
  double moment_tol = 0;     ///< 1e-10 ||a||_1 (1 + l_Q)^delta
  std::string violation;     ///< first failing condition, empty if valid

  bool valid() const { return support_ok && size_ok && moments_ok; }
};

/// Checks the support, size and (when required) vanishing-moment conditions.
inline AtomReport validate_atom(const Atom& a) {
  AtomReport rep;
  const auto& g = a.grid;
  const double inv = 1.0 / a.scale;
  double sup = 0, sum_r = 0, l1 = 0;
  for (std::size_t k = 0; k < a.profile.size(); ++k) {
    double v = std::abs(a.profile.values[k] * inv);
    if (v == 0) continue;
    l1 += v;
    if (!a.cube.contains(g.point(a.profile.cells[k]))) {
      if (rep.support_ok) rep.violation = "support leaves the cube at cell " + std::to_string(a.profile.cells[k]);
      rep.support_ok = false;
      continue;
    }
    sup = std::max(sup, v);
    if (!std::isinf(a.r)) sum_r += std::pow(v, a.r);
  }
  l1 *= g.cell_volume();
  double norm = std::isinf(a.r) ? sup : std::pow(sum_r * g.cell_volume(), 1.0 / a.r);
  rep.size_ratio = norm / a.size_bound();
  rep.size_ok = rep.size_ratio <= 1 + 1e-9;
  if (!rep.size_ok && rep.violation.empty()) rep.violation = "size bound exceeded by factor " + std::to_string(rep.size_ratio);

  rep.moments_required = a.moments_required();
  // moments against ((x - x_Q))^beta: scale the unit-cube moments back by l^|beta|
  auto mom = centered_moments(g, a.profile, inv, a.cube, a.delta);
  auto idx = multi_indices(g.dim, a.delta);
  rep.moment_tol = 1e-10 * l1 * std::pow(1 + a.cube.side, a.delta);
  for (std::size_t b = 0; b < mom.size(); ++b) {
    double m = std::abs(mom[b]) * std::pow(a.cube.side, order(idx[b]));
    if (m > rep.worst_moment) rep.worst_moment = m;
  }
  if (rep.moments_required && rep.worst_moment > rep.moment_tol) {
    rep.moments_ok = false;
    if (rep.violation.empty()) {
      for (std::size_t b = 0; b < mom.size(); ++b)
        if (std::abs(mom[b]) * std::pow(a.cube.side, order(idx[b])) > rep.moment_tol) {
          rep.violation = "moment of order " + std::to_string(order(idx[b])) + " does not vanish";
          break;
        }
    }
  }
  return rep;
}

struct AtomConfig {
  double q = 0.5;
  double r = inf;
  int delta = 1;
  bool local = true;
};

/// Random smooth atom strictly inside `cube`: an interior product bump times a
/// random smooth factor, with its weighted P_delta projection removed when
/// moments are required, scaled so the size bound holds with equality.
inline Atom make_atom(const GridSpec& g, const Cube& cube, const AtomConfig& cfg, std::uint64_t seed) {
  require(cfg.q > 0 && cfg.r > 0 && cfg.delta >= 0, "atom exponents out of range");
  {
    auto inner = cell_box(g, cube);
    int m = g.margin_cells();
    for (int a = 0; a < g.dim; ++a)
      require(inner.lo[a] >= m && inner.hi[a] <= g.n() - m, "atom cube must lie inside the window margin");
  }
  const int dim = g.dim;
  const Point c = cube.center();
  const double half = 0.45 * cube.side;

  Patch w;  // interior bump weight
  for (std::size_t cell : cells_in(g, cube)) {
    Point x = g.point(cell);
    double v = 1;
    for (int a = 0; a < dim; ++a) {
      double u = (x[a] - c[a]) / half;
      v *= bump_profile(u * u);
    }
    if (v > 0) w.push(cell, v);
  }
  if (w.empty()) throw degenerate_atom("cube holds no interior cells");
  const bool moments = !cfg.local || cube.measure() < 1;

  for (int attempt = 0; attempt < 32; ++attempt) {
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * attempt);
    std::normal_distribution<double> nd(0, 1);
    // random polynomial of degree delta + 2 plus a random cosine
    auto idx = multi_indices(dim, cfg.delta + 2);
    std::vector<double> pc(idx.size());
    for (auto& v : pc) v = nd(rng);
    Point freq{nd(rng) * 3, nd(rng) * 3};
    double phase = nd(rng);
    std::vector<double> factor(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
      Point x = g.point(w.cells[k]);
      Point y{(x[0] - c[0]) / half, (x[1] - c[1]) / half};
      double v = std::cos(freq[0] * y[0] + freq[1] * y[1] + phase);
      for (std::size_t b = 0; b < idx.size(); ++b) v += pc[b] * monomial(y, idx[b], dim);
      factor[k] = v;
    }
    if (moments) {
      auto pr = project_poly(g, factor, w, cfg.delta, c, cube.side);
      for (std::size_t k = 0; k < w.size(); ++k) factor[k] -= pr.on_cells[k];
    }
    Patch prof;
    double peak = 0, raw_peak = 0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      double v = w.values[k] * factor[k];
      prof.push(w.cells[k], v);
      peak = std::max(peak, std::abs(v));
      raw_peak = std::max(raw_peak, w.values[k]);
    }
    if (!(peak > 1e-8 * raw_peak)) continue;
    Atom a{g, cube, std::move(prof), 1.0, cfg.q, cfg.r, cfg.delta, cfg.local};
    double norm = lq_norm(a.field(), cfg.r, cube);
    a.scale = norm / a.size_bound();
    return a;
  }
  throw degenerate_atom("no usable atom after 32 draws");
}

struct AtomBoundReport {
  std::vector<double> norms;  ///< ||a||_{H_loc^(q,p)} per atom
  double sup = 0;
  double median = 0;
  double dispersion() const { return median > 0 ? sup / median : 0.0; }
};

inline AtomBoundReport atom_uniform_bound(const std::vector<Atom>& batch, double q, double p) {
  AtomBoundReport rep;
  for (const auto& a : batch) {
    Field f = a.field();
    rep.norms.push_back(sup_norm(f) == 0 ? 0.0 : hqp_norm(f, q, p));
  }
  if (rep.norms.empty()) return rep;
  rep.sup = *std::max_element(rep.norms.begin(), rep.norms.end());
  auto sorted = rep.norms;
  std::sort(sorted.begin(), sorted.end());
  rep.median = sorted[sorted.size() / 2];
  return rep;
}

/// Smallest C with m(x) <= C [M chi_Q(x)]^theta / |Q|^{1/q} at all grid points
/// outside `outside`.
inline double domination_constant(const Field& m, const Cube& q_cube, double q, double theta,
                                  const Cube& outside) {
  const auto& g = m.grid();
  Field mq = hl_maximal(indicator(g, q_cube));
  const double chi = std::pow(q_cube.measure(), 1.0 / q);
  double c = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (outside.contains(g.point(i)) || m[i] == 0) continue;
    if (mq[i] <= 0) return inf;
    c = std::max(c, m[i] * chi / std::pow(mq[i], theta));
  }
  return c;
}

/// sup over grid points outside 4 sqrt(d) Q of M_loc(a)(x) ||chi_Q||_q / [M chi_Q(x)]^theta,
/// theta = (d + delta + 1)/d.
inline double atom_domination_constant(const Atom& a) {
  const int d = a.grid.dim;
  double theta = (d + a.delta + 1.0) / d;
  Field m = local_radial_maximal(a.field());
  return domination_constant(m, a.cube, a.q, theta, a.cube.dilate(4 * std::sqrt(double(d))));
}

/// Molecule with a parameterized decay condition.
struct Molecule {
  Field field;
  Cube cube;
  double q = 1;
  double r = inf;
  int delta = 0;
  double theta = -1;          ///< decay exponent; negative: d + delta + 1
  double decay_const = 1;

  double exponent() const { return theta > 0 ? theta : field.grid().dim + delta + 1.0; }
};

struct MoleculeReport {
  bool size_ok = true;
  bool decay_ok = true;
  bool moments_required = false;
  bool moments_ok = true;
  double size_ratio = 0;
  double decay_ratio = 0;  ///< worst |m(x)| / bound(x) outside Q
  double worst_moment = 0;
  bool valid() const { return size_ok && decay_ok && moments_ok; }
};

inline MoleculeReport validate_molecule(const Molecule& m) {
  MoleculeReport rep;
  const auto& g = m.field.grid();
  double inv_r = std::isinf(m.r) ? 0.0 : 1.0 / m.r;
  rep.size_ratio = lq_norm(m.field, m.r, m.cube) / std::pow(m.cube.measure(), inv_r - 1.0 / m.q);
  rep.size_ok = rep.size_ratio <= 1 + 1e-9;

  const double chi = std::pow(m.cube.measure(), 1.0 / m.q);
  const Point xq = m.cube.center();
  const double theta = m.exponent();
  for (std::size_t i = 0; i < m.field.size(); ++i) {
    Point x = g.point(i);
    if (m.cube.contains(x) || m.field[i] == 0) continue;
    Point z{x[0] - xq[0], x[1] - xq[1]};
    double bound = m.decay_const / chi * std::pow(1 + length(z, g.dim) / m.cube.side, -theta);
    rep.decay_ratio = std::max(rep.decay_ratio, std::abs(m.field[i]) / bound);
  }
  rep.decay_ok = rep.decay_ratio <= 1 + 1e-9;

  rep.moments_required = m.cube.measure() < 1;
  Patch all = support_patch(m.field);
  auto mom = centered_moments(g, all, 1.0, m.cube, m.delta);
  auto idx = multi_indices(g.dim, m.delta);
  for (std::size_t b = 0; b < mom.size(); ++b)
    rep.worst_moment = std::max(rep.worst_moment, std::abs(mom[b]) * std::pow(m.cube.side, order(idx[b])));
  double tol = 1e-10 * lq_norm(m.field, 1.0) * std::pow(1 + m.cube.side, m.delta);
  rep.moments_ok = !rep.moments_required || rep.worst_moment <= tol;
  return rep;
}

inline Molecule as_molecule(const Atom& a, double theta = -1, double decay_const = 1) {
  return {a.field(), a.cube, a.q, a.r, a.delta, theta, decay_const};
}

}  // namespace amalgam
