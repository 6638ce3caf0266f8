#pragma once

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "amalgam.hpp"
#include "atoms.hpp"
#include "whitney.hpp"

namespace amalgam {

struct LevelSet {
  int j = 0;
  double threshold = 0;  ///< 2^j
  Mask mask;             ///< {M f > 2^j}
};

struct LevelOptions {
  double q = 1, p = 1;        ///< exponents of the truncation test
  double truncation = 1e-6;   ///< ||chi_{M <= 2^j} M||_{q,p} <= truncation * ||M||_{q,p}
  int max_levels = 64;
  bool check_margin = true;
  double aperture = 3;  ///< nontangential surrogate with this aperture; 0: radial
};

/// Local maximal function used to cut level sets.
inline Field level_surrogate(const Field& f, double aperture, bool check_margin) {
  MaximalParams prm;
  prm.check_margin = check_margin;
  if (aperture > 0) {
    prm.variant = Variant::nontangential;
    prm.aperture = aperture;
  }
  return smooth_maximal(f, standard_bump_kernel(f.grid().dim), prm);
}

struct LevelSets {
  Field surrogate;  ///< local radial maximal function
  int j_min = 0;
  int j_max = 0;    ///< first empty level
  std::vector<LevelSet> levels;  ///< j = j_min .. j_max, ascending
};

inline Mask threshold_mask(const Field& m, double t) {
  Mask out(m.size(), 0);
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] > t;
  return out;
}

/// Nested level sets of a local maximal function between the first
/// empty level and the truncation level, which always leaves a complement.
inline LevelSets level_sets(const Field& f, const LevelOptions& opt = {}) {
  require(opt.max_levels >= 1, "max_levels must be positive");
  LevelSets out;
  out.surrogate = level_surrogate(f, opt.aperture, opt.check_margin);
  const Field& m = out.surrogate;
  const double top = sup_norm(m);
  if (top == 0) return out;
  out.j_max = static_cast<int>(std::ceil(std::log2(top)));
  if (std::ldexp(1.0, out.j_max) < top) ++out.j_max;
  const double total = amalgam_norm(m, opt.q, opt.p);
  out.j_min = out.j_max;
  for (int j = out.j_max - 1; j > out.j_max - opt.max_levels; --j) {
    const double t = std::ldexp(1.0, j);
    Field low(m.grid());
    std::size_t above = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] <= t) low[i] = m[i];
      else ++above;
    }
    if (above == m.size()) break;
    out.j_min = j;
    if (amalgam_norm(low, opt.q, opt.p) <= opt.truncation * total) break;
  }
  for (int j = out.j_min; j <= out.j_max; ++j) {
    double t = std::ldexp(1.0, j);
    out.levels.push_back({j, t, threshold_mask(m, t)});
  }
  return out;
}

/// One level of the Calderon-Zygmund split f = g_j + sum_k b_{j,k}.
struct CzSplit {
  Field g;
  std::vector<Patch> pieces;                 ///< b_{j,k} on the cells of eta_{j,k}
  std::vector<char> small;                   ///< |Q*| < 1: moments removed
  std::vector<std::optional<Projector>> projectors;  ///< for small cubes
  std::vector<std::vector<double>> c_on_cells;       ///< c_{j,k} on the cells of eta_{j,k}
  double max_c_eta = 0;                      ///< sup |c_{j,k} eta_{j,k}| over small cubes
  double worst_condition = 1;
};

/// b_{j,k} = (f - c_{j,k}) eta_{j,k} when |Q*| < 1 and f eta_{j,k} otherwise,
/// with c_{j,k} the eta-weighted P_delta projection of f.
inline CzSplit cz_split(const Field& f, const WhitneyCover& cover, const std::vector<Patch>& eta, int delta) {
  require(eta.size() == cover.cubes.size(), "partition and cover differ in length");
  const auto& g = f.grid();
  CzSplit s;
  s.g = f;
  const std::size_t n = eta.size();
  s.pieces.resize(n);
  s.small.assign(n, 0);
  s.projectors.resize(n);
  s.c_on_cells.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& w = cover.cubes[k];
    const auto& e = eta[k];
    Patch& b = s.pieces[k];
    b.cells = e.cells;
    b.values.resize(e.size());
    std::vector<double> fv(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) fv[i] = f[e.cells[i]];
    if (w.dilated.measure() < 1 && !e.empty()) {
      s.small[k] = 1;
      s.projectors[k].emplace(g, e, delta, w.dilated.center(), w.dilated.side);
      s.worst_condition = std::max(s.worst_condition, s.projectors[k]->condition());
      auto pr = (*s.projectors[k])(fv);
      s.c_on_cells[k] = std::move(pr.on_cells);
      for (std::size_t i = 0; i < e.size(); ++i) {
        b.values[i] = (fv[i] - s.c_on_cells[k][i]) * e.values[i];
        s.max_c_eta = std::max(s.max_c_eta, std::abs(s.c_on_cells[k][i] * e.values[i]));
      }
    } else {
      for (std::size_t i = 0; i < e.size(); ++i) b.values[i] = fv[i] * e.values[i];
    }
    for (std::size_t i = 0; i < e.size(); ++i) s.g[e.cells[i]] -= b.values[i];
  }
  return s;
}

struct DecomposeConfig {
  double q = 1, p = 1;
  int delta = 0;
  double truncation = 1e-6;
  int max_levels = 64;
  bool check_margin = true;
  double aperture = 3;  ///< level-set surrogate, as in LevelOptions
};

struct DecompositionEntry {
  double lambda = 0;
  Atom atom;  ///< profile A_{j,k}, scale lambda, cube c Q*_{j,k} with c <= C0
  int j = 0;
  int k = 0;
};

struct LevelStats {
  int j = 0;
  std::size_t mask_cells = 0;
  std::size_t cubes = 0;
  std::size_t boundary_cells = 0;
  int max_overlap = 0;      ///< max count of dilated cubes at a cell
  int support_overlap = 0;  ///< max count of atom supports at a cell
  double max_c_eta_ratio = 0;  ///< sup |c eta| / 2^j over small cubes
};

struct AtomicDecomposition {
  GridSpec grid;
  DecomposeConfig config;
  std::vector<DecompositionEntry> entries;
  Field residual;        ///< g_{j_min} plus rounding-level corrections
  int j_min = 0, j_max = 0;
  double C0 = 1;         ///< max enclosing dilation of consecutive-level cubes
  double C1 = 0;         ///< sup |A_{j,k}| / 2^j
  double diam_ratio = 0; ///< sup diam(Q*_{j+1,l}) / diam(Q*_{j,k}) over meeting pairs
  double worst_condition = 1;
  std::size_t nonzero_disjoint_corrections = 0;  ///< c_k^l != 0 on disjoint cubes
  std::size_t roundoff_pieces = 0;  ///< A_{j,k} at rounding level, kept in the residual
  double max_moment_fix = 0;        ///< largest moment clean-up relative to the local |f|
  std::vector<LevelStats> levels;
};

namespace detail {

/// Cell -> (cube index, eta value) lookup for one level.
struct EtaIndex {
  std::vector<std::size_t> start;
  std::vector<std::pair<int, double>> entries;

  EtaIndex(const GridSpec& g, const std::vector<Patch>& eta) : start(g.size() + 1, 0) {
    for (const auto& e : eta)
      for (std::size_t c : e.cells) ++start[c + 1];
    for (std::size_t c = 0; c < g.size(); ++c) start[c + 1] += start[c];
    entries.resize(start.back());
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    for (std::size_t k = 0; k < eta.size(); ++k)
      for (std::size_t i = 0; i < eta[k].size(); ++i)
        entries[fill[eta[k].cells[i]]++] = {static_cast<int>(k), eta[k].values[i]};
  }
};

inline double sup_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline Patch merge_cells(std::vector<std::pair<std::size_t, double>>& acc) {
  std::sort(acc.begin(), acc.end(), [](auto& a, auto& b) { return a.first < b.first; });
  Patch out;
  for (std::size_t i = 0; i < acc.size();) {
    std::size_t c = acc[i].first;
    double v = 0;
    for (; i < acc.size() && acc[i].first == c; ++i) v += acc[i].second;
    out.push(c, v);
  }
  return out;
}

}  // namespace detail

/// Atomic decomposition f = g_{j_min} + sum_{j,k} lambda_{j,k} a_{j,k} built
/// from consecutive Calderon-Zygmund splits:
///   A_{j,k} = b_{j,k} - eta_{j,k} b_{j+1} + sum_{l small} c_k^l eta_{j+1,l},
///   c_k^l = P_l((f - c_{j+1,l}) eta_{j,k}).
/// Every atom is validated; a failure throws construction_violation.
inline AtomicDecomposition atomic_decompose(const Field& f, const DecomposeConfig& cfg = {}) {
  require(cfg.q > 0 && cfg.p > 0 && cfg.delta >= 0, "decomposition exponents out of range");
  const auto& g = f.grid();
  AtomicDecomposition dec;
  dec.grid = g;
  dec.config = cfg;
  dec.residual = f;

  auto ls = level_sets(f, {cfg.q, cfg.p, cfg.truncation, cfg.max_levels, cfg.check_margin, cfg.aperture});
  dec.j_min = ls.j_min;
  dec.j_max = ls.j_max;
  if (ls.levels.empty()) return dec;

  struct Level {
    WhitneyCover cover;
    std::vector<Patch> eta;
    CzSplit split;
  };
  auto build = [&](const LevelSet& s) {
    Level lv;
    lv.cover = whitney(g, s.mask);
    lv.eta = partition_of_unity(g, s.mask, lv.cover);
    lv.split = cz_split(f, lv.cover, lv.eta, cfg.delta);
    LevelStats st;
    st.j = s.j;
    st.mask_cells = mask_count(s.mask);
    st.cubes = lv.cover.cubes.size();
    st.boundary_cells = lv.cover.boundary_cells;
    st.max_overlap = check_whitney(g, s.mask, lv.cover).max_overlap;
    st.max_c_eta_ratio = lv.split.max_c_eta / s.threshold;
    dec.levels.push_back(st);
    dec.worst_condition = std::max(dec.worst_condition, lv.split.worst_condition);
    return lv;
  };

  Level cur = build(ls.levels.front());
  dec.residual = cur.split.g;

  struct Raw {
    int j, k;
    Patch a;
    Cube qstar;
    double dilation;  ///< smallest enclosing dilation of the meeting next-level cubes
  };
  std::vector<Raw> raw;
  const double roundoff = 1e-12;
  for (std::size_t li = 0; li + 1 < ls.levels.size(); ++li) {
    const int j = ls.levels[li].j;
    Level next = build(ls.levels[li + 1]);
    const std::size_t nk = cur.eta.size();
    std::vector<std::vector<std::pair<std::size_t, double>>> acc(nk);
    std::vector<double> reach(nk, 1.0);

    // b_{j,k} - eta_{j,k} b_{j+1}
    Field bnext(g);
    for (const auto& b : next.split.pieces) b.add_to(bnext);
    for (std::size_t k = 0; k < nk; ++k) {
      const auto& e = cur.eta[k];
      const auto& b = cur.split.pieces[k];
      for (std::size_t i = 0; i < e.size(); ++i) {
        double v = b.values[i] - e.values[i] * bnext[e.cells[i]];
        acc[k].push_back({e.cells[i], v});
      }
    }

    // corrections c_k^l eta_{j+1,l} for small l, and geometry of meeting pairs
    detail::EtaIndex index(g, cur.eta);
    for (std::size_t l = 0; l < next.eta.size(); ++l) {
      const auto& el = next.eta[l];
      const auto& ql = next.cover.cubes[l].dilated;
      std::map<int, std::vector<double>> h;  // k -> (f - c_{j+1,l}) eta_{j,k} on the cells of eta_{j+1,l}
      for (std::size_t i = 0; i < el.size(); ++i) {
        std::size_t c = el.cells[i];
        for (std::size_t t = index.start[c]; t < index.start[c + 1]; ++t) {
          auto [k, ek] = index.entries[t];
          auto& v = h[k];
          if (v.empty()) v.assign(el.size(), 0.0);
          double base = next.split.small[l] ? f[c] - next.split.c_on_cells[l][i] : 0.0;
          v[i] = base * ek;
        }
      }
      for (auto& [k, v] : h) {
        const auto& qk = cur.cover.cubes[k].dilated;
        reach[k] = std::max(reach[k], qk.dilation_to_enclose(ql));
        dec.diam_ratio = std::max(dec.diam_ratio, ql.diameter() / qk.diameter());
        if (!next.split.small[l]) continue;
        auto pr = (*next.split.projectors[l])(v);
        if (!qk.intersects(ql))
          for (double x : pr.on_cells)
            if (x != 0) {
              ++dec.nonzero_disjoint_corrections;
              break;
            }
        for (std::size_t i = 0; i < el.size(); ++i)
          if (pr.on_cells[i] != 0) acc[k].push_back({el.cells[i], pr.on_cells[i] * el.values[i]});
      }
    }

    for (std::size_t k = 0; k < nk; ++k) {
      Patch a = detail::merge_cells(acc[k]);
      double peak = 0, local = 0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        peak = std::max(peak, std::abs(a.values[i]));
        local = std::max(local, std::abs(f[a.cells[i]]));
      }
      if (peak == 0) continue;
      if (peak <= roundoff * local) {
        // cancellation residue of an exactly vanishing piece
        a.add_to(dec.residual);
        ++dec.roundoff_pieces;
        continue;
      }
      const Cube& qs = cur.cover.cubes[k].dilated;
      const double dil = reach[k] * (1 + 1e-12);
      if (std::pow(dil * qs.side, g.dim) < 1) {
        // moments vanish up to cancellation error of order eps |f|; remove that
        // error so it is relative to |A| instead, and keep it in the residual
        Patch unit{a.cells, std::vector<double>(a.size(), 1.0)};
        auto pr = Projector(g, unit, cfg.delta, qs.center(), qs.side)(a.values);
        peak = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
          a.values[i] -= pr.on_cells[i];
          dec.residual[a.cells[i]] += pr.on_cells[i];
          peak = std::max(peak, std::abs(a.values[i]));
        }
        dec.max_moment_fix = std::max(dec.max_moment_fix, detail::sup_abs(pr.on_cells) / std::max(local, peak));
        if (peak == 0) continue;
      }
      dec.C1 = std::max(dec.C1, peak / std::ldexp(1.0, j));
      raw.push_back({j, static_cast<int>(k), std::move(a), qs, dil});
    }
    cur = std::move(next);
  }
  for (const auto& r : raw) dec.C0 = std::max(dec.C0, r.dilation);

  std::map<int, std::vector<int>> support_count;
  for (auto& r : raw) {
    Cube qt = r.qstar.dilate(r.dilation);
    double lambda = dec.C1 * std::ldexp(1.0, r.j) * std::pow(qt.measure(), 1.0 / cfg.q);
    Atom a{g, qt, std::move(r.a), lambda, cfg.q, inf, cfg.delta, true};
    auto rep = validate_atom(a);
    if (!rep.valid())
      throw construction_violation("atom (j = " + std::to_string(r.j) + ", k = " + std::to_string(r.k) +
                                   "): " + rep.violation + " (worst moment " + detail::fmt(rep.worst_moment) +
                                   ", tolerance " + detail::fmt(rep.moment_tol) + ", side " + detail::fmt(qt.side) + ")");
    auto& cnt = support_count[r.j];
    if (cnt.empty()) cnt.assign(g.size(), 0);
    for (std::size_t c : a.profile.cells) ++cnt[c];
    dec.entries.push_back({lambda, std::move(a), r.j, r.k});
  }
  for (auto& st : dec.levels) {
    auto it = support_count.find(st.j);
    if (it != support_count.end()) st.support_overlap = *std::max_element(it->second.begin(), it->second.end());
  }
  return dec;
}

/// sum lambda a over the entries (the residual is not included).
inline Field reconstruct(const AtomicDecomposition& dec) {
  Field out(dec.grid);
  for (const auto& e : dec.entries) e.atom.profile.add_to(out, e.lambda / e.atom.scale);
  return out;
}

struct CoefficientEntry {
  double lambda = 0;
  Cube cube;
};

/// || sum (|lambda| / ||chi_Q||_q)^eta chi_Q ||_{q/eta, p/eta}^{1/eta}, cubes
/// sampled by cell centers.
inline double coefficient_functional(const GridSpec& g, const std::vector<CoefficientEntry>& entries,
                                     double q, double p, double eta) {
  require(q > 0 && p > 0 && eta > 0, "coefficient functional needs q, p, eta > 0");
  Field F(g);
  for (const auto& e : entries) {
    double w = std::pow(std::abs(e.lambda) / std::pow(e.cube.measure(), 1.0 / q), eta);
    if (w == 0) continue;
    for_each_cell(g, cell_box(g, e.cube), [&](std::size_t c) { F[c] += w; });
  }
  double n = amalgam_norm(F, q / eta, p / eta);
  return n == 0 ? 0.0 : std::pow(n, 1.0 / eta);
}

inline std::vector<CoefficientEntry> coefficients(const AtomicDecomposition& dec) {
  std::vector<CoefficientEntry> out;
  for (const auto& e : dec.entries) out.push_back({e.lambda, e.atom.cube});
  return out;
}

inline double coefficient_functional(const AtomicDecomposition& dec, double eta) {
  return coefficient_functional(dec.grid, coefficients(dec), dec.config.q, dec.config.p, eta);
}

struct BandSplit {
  Field u;  ///< f - v, spectrum vanishing on |xi| <= 1
  Field v;  ///< f * theta, spectrum supported in |xi| < 2
};

/// Frequency cutoff psi: 1 on |xi| <= 1, 0 for |xi| >= 2.
inline double bandlimit_cutoff(double r) { return smooth_step_down(r, 1.0, 2.0); }

inline BandSplit bandlimit_split(const Field& f) {
  const auto& g = f.grid();
  auto s = fft::spectrum(f);
  for (std::size_t c = 0; c < s.size(); ++c) s[c] *= bandlimit_cutoff(length(fft::frequency(g, c), g.dim));
  fft::inverse(s, g);
  BandSplit out{Field(g), Field(g)};
  for (std::size_t c = 0; c < s.size(); ++c) {
    out.v[c] = s[c].real();
    out.u[c] = f[c] - out.v[c];
  }
  return out;
}

struct UnitCubeDecomposition {
  GridSpec grid;
  std::vector<DecompositionEntry> entries;  ///< sigma^m, atom v chi_R / sigma on R^m
  int max_neighbors = 0;                    ///< max #{k : R^m meets R^k}
  double ppn = 0;                           ///< ||(M_HL |v|^s)^{1/s}||_{q,p}, s = q/2
  double s = 0;
};

/// Lattice unit cubes R^m with sigma^m = sup_R |v| and b^m = v chi_R / sigma^m.
/// Cells are owned by the cube containing their center, so the cubes
/// partition the grid and sum sigma b = v exactly.
inline UnitCubeDecomposition unitcube_decompose(const Field& v, double q, double p, int delta = 0) {
  require(q > 0 && p > 0, "unit-cube decomposition needs q, p > 0");
  const auto& g = v.grid();
  UnitCubeDecomposition out;
  out.grid = g;
  const int L = g.half_width;
  std::vector<Cube> cubes;
  for (int a = -L; a < L; ++a)
    for (int b = -L; b < (g.dim == 2 ? L : -L + 1); ++b) {
      Cube r = lattice_cube(g.dim, a, g.dim == 2 ? b : 0);
      Patch prof;
      double sigma = 0;
      for_each_cell(g, cell_box(g, r), [&](std::size_t c) {
        if (v[c] != 0) prof.push(c, v[c]);
        sigma = std::max(sigma, std::abs(v[c]));
      });
      if (sigma == 0) continue;
      cubes.push_back(r);
      out.entries.push_back({sigma, Atom{g, r, std::move(prof), sigma, q, inf, delta, true}, 0,
                             static_cast<int>(out.entries.size())});
    }
  for (const auto& r : cubes) {
    int cnt = 0;
    for (const auto& o : cubes) cnt += r.intersects(o);
    out.max_neighbors = std::max(out.max_neighbors, cnt);
  }
  out.s = q / 2;
  Field pw(g);
  for (std::size_t c = 0; c < v.size(); ++c) pw[c] = std::pow(std::abs(v[c]), out.s);
  Field m = hl_maximal(pw);
  for (auto& x : m.values()) x = std::pow(x, 1.0 / out.s);
  out.ppn = amalgam_norm(m, q, p);
  return out;
}

inline std::vector<CoefficientEntry> coefficients(const UnitCubeDecomposition& dec) {
  std::vector<CoefficientEntry> out;
  for (const auto& e : dec.entries) out.push_back({e.lambda, e.atom.cube});
  return out;
}

struct FiniteNormReport {
  double given = 0;       ///< functional of the supplied decomposition
  double recomputed = 0;  ///< functional of the constructed decomposition
  double upper = 0;       ///< min of the two
  double lower = 0;       ///< ||f||_{H_loc^(q,p)}
  double ratio = 0;
  bool degenerate = false;  ///< f = 0
};

/// Compares the finite-atomic functional with the maximal-function norm for
/// f = sum lambda_n a_n. The recomputed decomposition carries its residual as
/// one extra atom on a bounding cube of side >= 1.
inline FiniteNormReport finite_norm_equivalence(const std::vector<DecompositionEntry>& combo,
                                                const DecomposeConfig& cfg, double eta) {
  require(!combo.empty(), "finite combination is empty");
  const auto& g = combo.front().atom.grid;
  FiniteNormReport rep;
  Field f(g);
  std::vector<CoefficientEntry> given;
  for (const auto& e : combo) {
    e.atom.profile.add_to(f, e.lambda / e.atom.scale);
    given.push_back({e.lambda, e.atom.cube});
  }
  rep.lower = hqp_norm(f, cfg.q, cfg.p);
  if (sup_norm(f) == 0) {
    rep.degenerate = true;
    return rep;
  }
  rep.given = coefficient_functional(g, given, cfg.q, cfg.p, eta);

  auto dec = atomic_decompose(f, cfg);
  auto mine = coefficients(dec);
  const double gs = sup_norm(dec.residual);
  if (gs > 0) {
    Point lo{inf, inf}, hi{-inf, -inf};
    for (std::size_t c = 0; c < f.size(); ++c)
      if (dec.residual[c] != 0) {
        Point x = g.point(c);
        for (int a = 0; a < g.dim; ++a) lo[a] = std::min(lo[a], x[a] - g.h() / 2), hi[a] = std::max(hi[a], x[a] + g.h() / 2);
      }
    double side = 1;
    for (int a = 0; a < g.dim; ++a) side = std::max(side, hi[a] - lo[a]);
    Cube b{g.dim, {lo[0], g.dim == 2 ? lo[1] : 0.0}, side};
    mine.push_back({gs * std::pow(b.measure(), 1.0 / cfg.q), b});
  }
  rep.recomputed = coefficient_functional(g, mine, cfg.q, cfg.p, eta);
  rep.upper = std::min(rep.given, rep.recomputed);
  rep.ratio = rep.upper / rep.lower;
  return rep;
}

}  // namespace amalgam
