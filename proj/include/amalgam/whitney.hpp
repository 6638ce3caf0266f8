#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "convolve.hpp"
#include "grid.hpp"

namespace amalgam {

using Mask = std::vector<char>;

inline std::size_t mask_count(const Mask& m) {
  return static_cast<std::size_t>(std::count(m.begin(), m.end(), char{1}));
}

struct WhitneyCube {
  Cube cube;     ///< dyadic cube Q
  Cube dilated;  ///< Q* = (9/8) Q
  IndexBox cells;
  bool boundary = false;  ///< single cell touching the complement; dist(Q, O^c) < diam(Q)
};

struct WhitneyCover {
  double dilation = 9.0 / 8.0;
  std::vector<WhitneyCube> cubes;
  std::size_t boundary_cells = 0;
};

namespace detail {

/// Counts of complement cells over boxes, by summed-area table.
class ComplementTable {
 public:
  ComplementTable(const GridSpec& g, const Mask& mask) : g_(g), n_(g.n()) {
    const int rows = g.dim == 1 ? 1 : n_;
    sat_.assign(static_cast<std::size_t>(rows + 1) * (n_ + 1), 0);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < n_; ++j) {
        std::size_t c = g.dim == 1 ? j : g.flat(i, j);
        at(i + 1, j + 1) = (mask[c] ? 0 : 1) + at(i, j + 1) + at(i + 1, j) - at(i, j);
      }
  }

  /// Complement cells in [lo, hi) (clipped to the window).
  long count(std::array<int, 2> lo, std::array<int, 2> hi) const {
    if (g_.dim == 1) {
      lo = {0, std::clamp(lo[0], 0, n_)};
      hi = {1, std::clamp(hi[0], 0, n_)};
    } else {
      for (int a = 0; a < 2; ++a) {
        lo[a] = std::clamp(lo[a], 0, n_);
        hi[a] = std::clamp(hi[a], 0, n_);
      }
    }
    if (hi[0] <= lo[0] || hi[1] <= lo[1]) return 0;
    return at(hi[0], hi[1]) - at(lo[0], hi[1]) - at(hi[0], lo[1]) + at(lo[0], lo[1]);
  }

 private:
  long& at(int i, int j) { return sat_[static_cast<std::size_t>(i) * (n_ + 1) + j]; }
  long at(int i, int j) const { return sat_[static_cast<std::size_t>(i) * (n_ + 1) + j]; }

  GridSpec g_;
  int n_;
  std::vector<long> sat_;
};

/// Euclidean gap (in cells) between block [lo, lo + s)^d and the complement
/// of the mask, counting everything outside the window as complement; the
/// search stops once the gap is known to reach `enough`.
inline double block_gap(const GridSpec& g, const Mask& mask, const ComplementTable& t,
                        std::array<int, 2> lo, int s, double enough) {
  const int n = g.n();
  double gap = inf;
  for (int a = 0; a < g.dim; ++a) gap = std::min({gap, double(lo[a]), double(n - lo[a] - s)});
  const int e = static_cast<int>(std::ceil(enough));
  std::array<int, 2> elo{lo[0] - e, lo[1] - e}, ehi{lo[0] + s + e, lo[1] + s + e};
  if (t.count(elo, ehi) == 0) return gap;
  if (g.dim == 1) {
    // nearest complement cell on either side
    for (int k = 0; k <= e; ++k) {
      int l = lo[0] - 1 - k, r = lo[0] + s + k;
      if ((l >= 0 && !mask[l]) || (r < n && !mask[r])) return std::min(gap, double(k));
    }
    return gap;
  }
  for (int i = std::max(0, elo[0]); i < std::min(n, ehi[0]); ++i)
    for (int j = std::max(0, elo[1]); j < std::min(n, ehi[1]); ++j) {
      if (mask[g.flat(i, j)]) continue;
      double gi = std::max({0, lo[0] - i - 1, i - (lo[0] + s)});
      double gj = std::max({0, lo[1] - j - 1, j - (lo[1] + s)});
      gap = std::min(gap, std::hypot(gi, gj));
    }
  return gap;
}

}  // namespace detail

/// Dyadic Whitney cover of a cell mask: maximal grid-aligned dyadic blocks
/// inside the mask with diam <= dist to the complement, dilated by 9/8.
/// Cells adjacent to the complement cannot meet the distance condition on the
/// grid and are kept as single-cell boundary cubes.
inline WhitneyCover whitney(const GridSpec& g, const Mask& mask) {
  require(mask.size() == g.size(), "mask length does not match the grid");
  WhitneyCover cover;
  const std::size_t inside = mask_count(mask);
  if (inside == 0) return cover;
  if (inside == mask.size()) throw no_complement("level set covers the whole window");

  const int n = g.n();
  int top = 1;
  while (top * 2 <= n && n % (top * 2) == 0) top *= 2;
  detail::ComplementTable table(g, mask);
  const double root_d = std::sqrt(static_cast<double>(g.dim));

  auto emit = [&](std::array<int, 2> lo, int s, bool boundary) {
    WhitneyCube w;
    w.cube = {g.dim, {-g.half_width + lo[0] * g.h(), g.dim == 2 ? -g.half_width + lo[1] * g.h() : 0.0},
              s * g.h()};
    w.dilated = w.cube.dilate(cover.dilation);
    w.cells.lo = lo;
    w.cells.hi = {lo[0] + s, g.dim == 2 ? lo[1] + s : 1};
    w.boundary = boundary;
    cover.boundary_cells += boundary;
    cover.cubes.push_back(w);
  };

  auto visit = [&](auto&& self, std::array<int, 2> lo, int s) -> void {
    std::array<int, 2> hi{lo[0] + s, g.dim == 2 ? lo[1] + s : 1};
    const long comp = table.count(lo, hi);
    const long cells = g.dim == 1 ? s : static_cast<long>(s) * s;
    if (comp == cells) return;  // no mask cells
    if (comp == 0) {
      double need = s * root_d;
      if (detail::block_gap(g, mask, table, lo, s, need) >= need) return emit(lo, s, false);
    }
    if (s == 1) return emit(lo, s, true);
    const int c = s / 2;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < (g.dim == 2 ? 2 : 1); ++b) self(self, {lo[0] + a * c, lo[1] + b * c}, c);
  };
  for (int i = 0; i < n; i += top)
    for (int j = 0; j < (g.dim == 2 ? n : 1); j += top) visit(visit, {i, j}, top);
  return cover;
}

struct WhitneyCheck {
  std::size_t uncovered = 0;         ///< mask cells outside every Q
  int max_overlap = 0;               ///< max over cells of the number of Q* containing it
  std::size_t dilation_misses = 0;   ///< cubes with 9d Q* inside the mask
  std::size_t distance_violations = 0;  ///< non-boundary cubes with dist outside [diam, 4 diam]
  bool ok() const { return uncovered == 0 && dilation_misses == 0 && distance_violations == 0; }
};

/// Exhaustive cell scan of the cover invariants.
inline WhitneyCheck check_whitney(const GridSpec& g, const Mask& mask, const WhitneyCover& cover) {
  WhitneyCheck chk;
  std::vector<int> inq(g.size(), 0), inq_star(g.size(), 0);
  detail::ComplementTable table(g, mask);
  const double root_d = std::sqrt(static_cast<double>(g.dim));
  for (const auto& w : cover.cubes) {
    for_each_cell(g, w.cells, [&](std::size_t c) { ++inq[c]; });
    for_each_cell(g, cell_box(g, w.dilated), [&](std::size_t c) {
      if (w.dilated.contains(g.point(c))) ++inq_star[c];
    });
    // 9d Q* must reach a complement cell or leave the window
    Cube big = w.dilated.dilate(9.0 * g.dim);
    auto b = cell_box(g, big);
    bool leaves = false;
    for (int a = 0; a < g.dim; ++a)
      if (big.corner[a] < -g.half_width || big.corner[a] + big.side > g.half_width) leaves = true;
    if (!leaves && table.count(b.lo, b.hi) == 0) ++chk.dilation_misses;
    if (!w.boundary) {
      const int s = w.cells.hi[0] - w.cells.lo[0];
      double gap = detail::block_gap(g, mask, table, w.cells.lo, s, 4 * s * root_d + 1);
      if (gap < s * root_d || gap > 4 * s * root_d) ++chk.distance_violations;
    }
  }
  for (std::size_t c = 0; c < mask.size(); ++c) {
    if (mask[c] && inq[c] == 0) ++chk.uncovered;
    chk.max_overlap = std::max(chk.max_overlap, inq_star[c]);
  }
  return chk;
}

/// Smooth partition of unity on the mask subordinate to the dilated cubes:
/// zeta_k = 1 on Q_k, vanishing at the boundary of Q*_k, eta_k = zeta_k / sum zeta.
inline std::vector<Patch> partition_of_unity(const GridSpec& g, const Mask& mask, const WhitneyCover& cover) {
  std::vector<Patch> zeta(cover.cubes.size());
  std::vector<double> total(g.size(), 0.0);
  const double outer = cover.dilation;
  for (std::size_t k = 0; k < cover.cubes.size(); ++k) {
    const auto& w = cover.cubes[k];
    const Point c = w.cube.center();
    const double half = w.cube.side / 2;
    for_each_cell(g, cell_box(g, w.dilated), [&](std::size_t cell) {
      if (!mask[cell]) return;
      Point x = g.point(cell);
      double v = 1;
      for (int a = 0; a < g.dim; ++a) v *= smooth_step_down(std::abs(x[a] - c[a]) / half, 1.0, outer);
      if (v > 0) {
        zeta[k].push(cell, v);
        total[cell] += v;
      }
    });
  }
  for (std::size_t c = 0; c < mask.size(); ++c)
    if (mask[c] && !(total[c] > 0)) throw cover_gap("mask cell " + std::to_string(c) + " has no covering cube");
  for (auto& z : zeta)
    for (std::size_t i = 0; i < z.size(); ++i) z.values[i] /= total[z.cells[i]];
  return zeta;
}

}  // namespace amalgam
