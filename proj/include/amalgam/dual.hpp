#pragma once

#include <cmath>
#include <vector>

#include "amalgam.hpp"
#include "czdecomp.hpp"
#include "polynomial.hpp"

namespace amalgam {

struct DualParams {
  double rprime = inf;  ///< r' in [1, inf]
  int delta = 0;
  int k0 = -1;          ///< smallest side 2^{-k0}; negative: log2(M) - 2
  bool shifted = true;  ///< add copies at half-side offsets
};

/// ||chi_Q||_{q,p} from the overlaps of Q with the lattice cubes.
inline double indicator_amalgam_norm(const Cube& q_cube, double q, double p) {
  std::vector<std::vector<double>> parts(q_cube.dim);
  for (int a = 0; a < q_cube.dim; ++a) {
    double lo = q_cube.corner[a], hi = lo + q_cube.side;
    for (double k = std::floor(lo); k < hi; k += 1) {
      double len = std::min(hi, k + 1) - std::max(lo, k);
      if (len > 0) parts[a].push_back(len);
    }
  }
  std::vector<double> logs;
  for (double x : parts[0]) {
    if (q_cube.dim == 1) {
      logs.push_back(std::log(x) / q);
      continue;
    }
    for (double y : parts[1]) logs.push_back(std::log(x * y) / q);
  }
  return std::exp(log_lp_combine(logs, p));
}

/// phi_1(Q) = ||chi_Q||_{q,p} / |Q|.
inline double phi1(const Cube& q_cube, double q, double p) {
  return indicator_amalgam_norm(q_cube, q, p) / q_cube.measure();
}

/// Dyadic cubes inside the window with sides 2^{-k0}, ..., 2L, grid aligned,
/// plus half-side shifted copies.
inline std::vector<Cube> dual_cube_family(const GridSpec& g, const DualParams& prm) {
  int k0 = prm.k0;
  if (k0 < 0) k0 = std::max(0, static_cast<int>(std::lround(std::log2(g.per_unit))) - 2);
  std::vector<Cube> out;
  const double L = g.half_width;
  for (double s = std::ldexp(1.0, -k0); s <= 2 * L; s *= 2) {
    require(s * g.per_unit >= 1, "dual cube family finer than the grid");
    const double step = prm.shifted ? s / 2 : s;
    const int count = static_cast<int>(std::floor((2 * L - s) / step + 1e-9)) + 1;
    for (int a = 0; a < count; ++a)
      for (int b = 0; b < (g.dim == 2 ? count : 1); ++b)
        out.push_back({g.dim, {-L + a * step, g.dim == 2 ? -L + b * step : 0.0}, s});
  }
  return out;
}

struct CampanatoReport {
  double big = 0;    ///< sup over |Q| >= 1
  double small = 0;  ///< sup over |Q| < 1, polynomial part removed
  Cube argmax_big, argmax_small;
  std::size_t cubes = 0;
  double norm() const { return big + small; }
  double max_form() const { return std::max(big, small); }
};

namespace detail {

/// (|Q|^{-1} int_Q |v|^r)^{1/r} over the given cell values, or max |v| for r = inf.
inline double cube_average(const std::vector<double>& v, double r) {
  if (v.empty()) return 0.0;
  if (std::isinf(r)) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  double s = 0;
  for (double x : v) s += std::pow(std::abs(x), r);
  return std::pow(s / v.size(), 1.0 / r);
}

}  // namespace detail

/// Campanato-type local norm over a cube family: the large-cube supremum of
/// L^{r'} averages plus the small-cube supremum of L^{r'} averages of
/// g - P_Q^delta g, each divided by phi_1(Q).
inline CampanatoReport campanato_local_norm(const Field& g, const DualParams& prm, double q, double p,
                                            const std::vector<Cube>& family) {
  require(prm.rprime >= 1 && prm.delta >= 0, "campanato norm needs r' >= 1 and delta >= 0");
  const auto& grid = g.grid();
  require(prm.delta >= std::floor(grid.dim * (1 / q - 1) + 1e-12), "delta below floor(d(1/q - 1))");
  CampanatoReport rep;
  rep.cubes = family.size();
  for (const auto& cube : family) {
    auto cells = cells_in(grid, cube);
    std::vector<double> v(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) v[i] = g[cells[i]];
    const double w = phi1(cube, q, p);
    if (cube.measure() >= 1) {
      double a = detail::cube_average(v, prm.rprime) / w;
      if (a > rep.big) rep.big = a, rep.argmax_big = cube;
    } else {
      Patch unit{cells, std::vector<double>(cells.size(), 1.0)};
      auto pr = project_poly(grid, v, unit, prm.delta, cube.center(), cube.side);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= pr.on_cells[i];
      double a = detail::cube_average(v, prm.rprime) / w;
      if (a > rep.small) rep.small = a, rep.argmax_small = cube;
    }
  }
  return rep;
}

inline CampanatoReport campanato_local_norm(const Field& g, const DualParams& prm, double q, double p) {
  return campanato_local_norm(g, prm, q, p, dual_cube_family(g.grid(), prm));
}

/// Local bmo: q = p = 1, r' = 1, delta = 0.
inline CampanatoReport bmo_norm(const Field& g, int k0 = -1) {
  DualParams prm{1.0, 0, k0, true};
  return campanato_local_norm(g, prm, 1, 1);
}

struct PairingReport {
  double pairing = 0;     ///< |int g f|
  double dual_norm = 0;   ///< ||g||_{L^loc_{r', phi_1, delta}}
  double functional = 0;  ///< finite-decomposition functional of f
  double ratio = 0;       ///< pairing / (dual_norm * functional)
};

/// |int g f| against ||g||_{L^loc} times the coefficient functional of the
/// finite combination f = sum lambda_n a_n.
inline PairingReport pairing_experiment(const Field& g, const std::vector<DecompositionEntry>& combo,
                                        const DualParams& prm, double q, double p, double eta) {
  require(!combo.empty(), "pairing needs a nonempty combination");
  const auto& grid = g.grid();
  PairingReport rep;
  std::vector<CoefficientEntry> coeffs;
  double s = 0;
  for (const auto& e : combo) {
    require(e.atom.grid == grid, "atom and g live on different grids");
    const auto& pr = e.atom.profile;
    double part = 0;
    for (std::size_t i = 0; i < pr.size(); ++i) part += g[pr.cells[i]] * pr.values[i];
    s += part * e.lambda / e.atom.scale;
    coeffs.push_back({e.lambda, e.atom.cube});
  }
  rep.pairing = std::abs(s * grid.cell_volume());
  rep.dual_norm = campanato_local_norm(g, prm, q, p).norm();
  rep.functional = coefficient_functional(grid, coeffs, q, p, eta);
  double den = rep.dual_norm * rep.functional;
  rep.ratio = den > 0 ? rep.pairing / den : 0.0;
  return rep;
}

}  // namespace amalgam
