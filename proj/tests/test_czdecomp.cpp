#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "amalgam/czdecomp.hpp"

using namespace amalgam;

namespace {

Field bump_at(const GridSpec& g, Point c, double r, double amp = 1.0) {
  return sample(g, [&](const Point& x) {
    Point y{(x[0] - c[0]) / r, (x[1] - c[1]) / r};
    return amp * bump(y, g.dim);
  });
}

/// Union of random disks (intervals in 1D), away from the window edge.
Mask blob_mask(const GridSpec& g, std::mt19937_64& rng, int count) {
  std::uniform_real_distribution<double> c(-g.half_width + 1.5, g.half_width - 1.5), r(0.2, 1.2);
  std::vector<std::array<double, 3>> disks(count);
  for (auto& d : disks) d = {c(rng), c(rng), r(rng)};
  Mask m(g.size(), 0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    Point x = g.point(i);
    for (auto& d : disks)
      if (length({x[0] - d[0], g.dim == 2 ? x[1] - d[1] : 0.0}, g.dim) < d[2]) m[i] = 1;
  }
  return m;
}

/// Brute-force Euclidean gap between a cube and the complement cells, in length units.
double gap_bruteforce(const GridSpec& g, const Mask& m, const Cube& q) {
  double best = inf;
  for (int a = 0; a < g.dim; ++a)
    best = std::min({best, q.corner[a] + g.half_width, g.half_width - q.corner[a] - q.side});
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i]) continue;
    Point x = g.point(i);
    double s = 0;
    for (int a = 0; a < g.dim; ++a) {
      double lo = x[a] - g.h() / 2, hi = x[a] + g.h() / 2;
      double d = std::max({0.0, q.corner[a] - hi, lo - (q.corner[a] + q.side)});
      s += d * d;
    }
    best = std::min(best, std::sqrt(s));
  }
  return best;
}

}  // namespace

TEST(LevelSets, ZeroAndNesting) {
  GridSpec g{1, 4, 16};
  EXPECT_TRUE(level_sets(Field(g)).levels.empty());
  auto f = bump_at(g, {0.3, 0}, 1.0, 5.0) - bump_at(g, {-1, 0}, 0.5, 2.0);
  auto ls = level_sets(f);
  ASSERT_GE(ls.levels.size(), 2u);
  EXPECT_EQ(mask_count(ls.levels.back().mask), 0u);
  EXPECT_LE(sup_norm(ls.surrogate), sup_norm(f) * (1 + 1e-12));
  for (std::size_t l = 0; l + 1 < ls.levels.size(); ++l) {
    EXPECT_GT(mask_count(ls.levels[l].mask), 0u);
    EXPECT_LT(mask_count(ls.levels[l].mask), g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      if (ls.levels[l + 1].mask[i]) EXPECT_TRUE(ls.levels[l].mask[i]);
  }
}

TEST(Whitney, EmptyAndFullMasks) {
  GridSpec g{1, 4, 16};
  EXPECT_TRUE(whitney(g, Mask(g.size(), 0)).cubes.empty());
  EXPECT_THROW(whitney(g, Mask(g.size(), 1)), no_complement);
}

TEST(Whitney, LatticeCubeInterior) {
  for (int dim : {1, 2}) {
    GridSpec g{dim, 4, 16};
    auto f = indicator(g, dim == 1 ? lattice_cube(1, 0) : lattice_cube(2, 0, -1));
    Mask m(g.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = f[i] > 0;
    auto cover = whitney(g, m);
    ASSERT_FALSE(cover.cubes.empty());
    auto chk = check_whitney(g, m, cover);
    EXPECT_EQ(chk.uncovered, 0u);
    EXPECT_TRUE(chk.ok());
  }
}

TEST(Whitney, RandomMasksAgainstBruteForce) {
  std::mt19937_64 rng(7);
  for (int dim : {1, 2}) {
    GridSpec g = dim == 1 ? GridSpec{1, 8, 32} : GridSpec{2, 4, 16};
    for (int trial = 0; trial < 3; ++trial) {
      auto m = blob_mask(g, rng, 3);
      auto cover = whitney(g, m);
      auto chk = check_whitney(g, m, cover);
      EXPECT_TRUE(chk.ok());
      EXPECT_LE(chk.max_overlap, dim == 1 ? 2 : 4);
      // independent scans: union covers the mask, Q_k disjoint, distance band, 9d Q* reaches outside
      std::vector<int> hits(g.size(), 0);
      for (const auto& w : cover.cubes) {
        for (std::size_t c : cells_in(g, w.cube)) ++hits[c];
        double gap = gap_bruteforce(g, m, w.cube);
        if (!w.boundary) {
          EXPECT_GE(gap, w.cube.diameter() * (1 - 1e-12));
          EXPECT_LE(gap, 4 * w.cube.diameter() * (1 + 1e-12));
        } else {
          EXPECT_LT(gap, w.cube.diameter());
        }
        Cube big = w.dilated.dilate(9.0 * dim);
        bool meets = false;
        for (int a = 0; a < dim; ++a)
          meets |= big.corner[a] < -g.half_width || big.corner[a] + big.side > g.half_width;
        for (std::size_t c = 0; c < m.size() && !meets; ++c) meets = !m[c] && big.contains(g.point(c));
        EXPECT_TRUE(meets);
      }
      for (std::size_t c = 0; c < m.size(); ++c) EXPECT_EQ(hits[c], m[c] ? 1 : 0);
    }
  }
}

TEST(PartitionOfUnity, SumsToMaskIndicator) {
  std::mt19937_64 rng(9);
  for (int dim : {1, 2}) {
    GridSpec g = dim == 1 ? GridSpec{1, 8, 32} : GridSpec{2, 4, 16};
    auto m = blob_mask(g, rng, 3);
    auto cover = whitney(g, m);
    auto eta = partition_of_unity(g, m, cover);
    Field sum(g);
    for (std::size_t k = 0; k < eta.size(); ++k) {
      eta[k].add_to(sum);
      for (std::size_t i = 0; i < eta[k].size(); ++i) {
        EXPECT_GE(eta[k].values[i], 0.0);
        EXPECT_LE(eta[k].values[i], 1.0);
        EXPECT_TRUE(cover.cubes[k].dilated.contains(g.point(eta[k].cells[i])));
      }
    }
    for (std::size_t c = 0; c < m.size(); ++c) EXPECT_NEAR(sum[c], m[c] ? 1.0 : 0.0, 1e-10);
  }
}

TEST(PartitionOfUnity, HandBuiltCovers) {
  GridSpec g{1, 4, 16};
  Mask m(g.size(), 0);
  for (std::size_t c : cells_in(g, Cube{1, {0, 0}, 0.5})) m[c] = 1;
  WhitneyCover one;
  one.cubes.push_back({Cube{1, {0, 0}, 0.5}, Cube{1, {0, 0}, 0.5}.dilate(9.0 / 8), cell_box(g, Cube{1, {0, 0}, 0.5})});
  auto eta = partition_of_unity(g, m, one);
  for (double v : eta[0].values) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(eta[0].size(), 8u);

  // two halves: on the overlap both weights lie strictly between 0 and 1
  WhitneyCover two;
  for (double lo : {0.0, 0.25}) {
    Cube q{1, {lo, 0}, 0.25};
    two.cubes.push_back({q, q.dilate(9.0 / 8), cell_box(g, q)});
  }
  GridSpec fine{1, 4, 64};
  Mask mf(fine.size(), 0);
  for (std::size_t c : cells_in(fine, Cube{1, {0, 0}, 0.5})) mf[c] = 1;
  for (auto& w : two.cubes) w.cells = cell_box(fine, w.cube);
  auto e2 = partition_of_unity(fine, mf, two);
  int shared = 0;
  Field s0 = e2[0].to_field(fine), s1 = e2[1].to_field(fine);
  for (std::size_t c = 0; c < mf.size(); ++c)
    if (s0[c] > 0 && s1[c] > 0) {
      ++shared;
      EXPECT_LT(s0[c], 1.0);
      EXPECT_NEAR(s0[c] + s1[c], 1.0, 1e-15);
    }
  EXPECT_GT(shared, 0);
  EXPECT_THROW(partition_of_unity(g, Mask(g.size(), 1), WhitneyCover{}), cover_gap);
}

TEST(CzSplit, IdentityAndMoments) {
  GridSpec g{2, 4, 16};
  std::mt19937_64 rng(2);
  auto m = blob_mask(g, rng, 2);
  auto cover = whitney(g, m);
  auto eta = partition_of_unity(g, m, cover);
  auto f = bump_at(g, {0.2, -0.1}, 2.0, 3.0);
  auto s = cz_split(f, cover, eta, 1);
  Field sum = s.g;
  for (const auto& b : s.pieces) b.add_to(sum);
  for (std::size_t c = 0; c < f.size(); ++c) EXPECT_NEAR(sum[c], f[c], 1e-14);
  for (std::size_t k = 0; k < s.pieces.size(); ++k) {
    if (!s.small[k]) continue;
    // int b p dx = 0 for p in P_1, direct quadrature
    for (int b = 0; b < 3; ++b) {
      double mom = 0, mass = 0;
      for (std::size_t i = 0; i < s.pieces[k].size(); ++i) {
        Point x = g.point(s.pieces[k].cells[i]);
        double p = b == 0 ? 1.0 : x[b - 1];
        mom += s.pieces[k].values[i] * p;
        mass += std::abs(s.pieces[k].values[i]);
      }
      EXPECT_LE(std::abs(mom), 1e-12 * (1 + mass));
    }
  }
}

TEST(CzSplit, FieldOutsideMaskIsUntouched) {
  GridSpec g{1, 4, 16};
  Mask m(g.size(), 0);
  for (std::size_t c : cells_in(g, Cube{1, {1, 0}, 1})) m[c] = 1;
  auto cover = whitney(g, m);
  auto eta = partition_of_unity(g, m, cover);
  auto f = indicator(g, Cube{1, {-2, 0}, 1});
  auto s = cz_split(f, cover, eta, 0);
  for (const auto& b : s.pieces)
    for (double v : b.values) EXPECT_EQ(v, 0.0);
  for (std::size_t c = 0; c < f.size(); ++c) EXPECT_EQ(s.g[c], f[c]);
}

TEST(AtomicDecompose, ZeroGivesEmpty) {
  GridSpec g{1, 4, 16};
  auto dec = atomic_decompose(Field(g));
  EXPECT_TRUE(dec.entries.empty());
  EXPECT_EQ(sup_norm(dec.residual), 0.0);
}

TEST(AtomicDecompose, TelescopingAndAtoms) {
  for (int dim : {1, 2}) {
    GridSpec g = dim == 1 ? GridSpec{1, 8, 32} : GridSpec{2, 4, 16};
    auto f = bump_at(g, {0.3, -0.2}, 1.5, 4.0) - bump_at(g, {-1.0, 0.7}, 0.6, 3.0);
    DecomposeConfig cfg{0.5, 0.5, ExponentConfig::min_delta(dim, 0.5)};
    auto dec = atomic_decompose(f, cfg);
    ASSERT_FALSE(dec.entries.empty());
    Field rec = reconstruct(dec);
    double worst = 0, err2 = 0, f2 = 0;
    for (std::size_t c = 0; c < f.size(); ++c) {
      double e = rec[c] + dec.residual[c] - f[c];
      worst = std::max(worst, std::abs(e));
      err2 += e * e;
      f2 += f[c] * f[c];
    }
    EXPECT_LE(worst, 1e-10 * sup_norm(f));
    EXPECT_LE(std::sqrt(err2 / f2), 1e-8);
    EXPECT_EQ(dec.nonzero_disjoint_corrections, 0u);
    EXPECT_GE(dec.C0, 1.0);
    for (const auto& e : dec.entries) {
      auto rep = validate_atom(e.atom);
      EXPECT_TRUE(rep.valid()) << rep.violation;
      EXPECT_EQ(rep.moments_required, e.atom.cube.measure() < 1);
      EXPECT_NEAR(e.lambda, dec.C1 * std::ldexp(1.0, e.j) * std::pow(e.atom.cube.measure(), 1 / cfg.q),
                  1e-12 * e.lambda);
    }
    for (const auto& st : dec.levels) {
      EXPECT_LE(st.max_overlap, dim == 1 ? 2 : 4);
      EXPECT_LT(st.max_c_eta_ratio, 50.0);
    }
  }
}

TEST(AtomicDecompose, ResidualIsBelowLowestLevel) {
  GridSpec g{1, 8, 32};
  auto f = bump_at(g, {0, 0}, 2.0, 1.0);
  auto dec = atomic_decompose(f, {1, 1, 0});
  // outside O^{j_min} the residual is f itself and M f <= 2^{j_min} there
  auto M = level_surrogate(f, DecomposeConfig{}.aperture, true);
  double t = std::ldexp(1.0, dec.j_min);
  for (std::size_t c = 0; c < f.size(); ++c)
    if (M[c] <= t) EXPECT_EQ(dec.residual[c], f[c]);
}

TEST(CoefficientFunctional, ClosedForms) {
  for (int dim : {1, 2}) {
    GridSpec g{dim, 4, 16};
    EXPECT_EQ(coefficient_functional(g, {}, 0.5, 1, 0.5), 0.0);
    Cube q{dim, {0, 0}, 2};
    for (double eta : {0.25, 0.5, 1.0}) {
      for (auto [qq, pp] : {std::pair{0.5, 1.0}, std::pair{1.0, 2.0}}) {
        double want = std::pow(2.0, dim / pp - dim / qq);
        double got = coefficient_functional(g, {{1.0, q}}, qq, pp, eta);
        EXPECT_NEAR(got, want, 1e-12 * want);
        EXPECT_NEAR(coefficient_functional(g, {{2.0, q}}, qq, pp, eta), 2 * got, 1e-12 * got);
      }
    }
  }
}

TEST(BandlimitSplit, LowFrequenciesPassUnchanged) {
  GridSpec g{1, 4, 16};
  auto f = sample(g, [](const Point& x) { return std::cos(2 * std::numbers::pi * 0.5 * x[0]) + std::sin(2 * std::numbers::pi * 0.875 * x[0]); });
  auto s = bandlimit_split(f);
  EXPECT_LT(sup_norm(s.u), 1e-13);
  EXPECT_LT(sup_norm(s.v - f), 1e-13);
}

TEST(BandlimitSplit, HighPartIsInvisibleToLargeScales) {
  for (int dim : {1, 2}) {
    GridSpec g = dim == 1 ? GridSpec{1, 8, 32} : GridSpec{2, 4, 16};
    auto f = bump_at(g, {0.1, 0.2}, 0.4, 1.0) + indicator(g, dim == 1 ? lattice_cube(1, -2) : lattice_cube(2, -2, 1));
    auto s = bandlimit_split(f);
    for (std::size_t c = 0; c < f.size(); ++c) EXPECT_NEAR(s.u[c] + s.v[c], f[c], 1e-15);
    for (double t : {2.0, 4.0}) {
      auto w = convolve_dilated(s.u, frequency_bump_kernel(dim), t, {false});
      EXPECT_LE(sup_norm(w), 1e-12) << "t = " << t;
    }
  }
}

TEST(UnitCubeDecompose, ExactAndBoundedOverlap) {
  for (int dim : {1, 2}) {
    GridSpec g{dim, 4, 16};
    EXPECT_TRUE(unitcube_decompose(Field(g), 0.5, 1).entries.empty());
    auto f = bump_at(g, {0.1, 0.3}, 1.7, 2.0);
    auto v = bandlimit_split(f).v;
    auto dec = unitcube_decompose(v, 0.5, 1);
    Field sum(g);
    for (const auto& e : dec.entries) {
      e.atom.profile.add_to(sum, e.lambda / e.atom.scale);
      EXPECT_TRUE(validate_atom(e.atom).valid());
      EXPECT_EQ(e.atom.cube.measure(), 1.0);
    }
    for (std::size_t c = 0; c < v.size(); ++c) EXPECT_EQ(sum[c], v[c]);
    EXPECT_LE(dec.max_neighbors, dim == 1 ? 3 : 9);
    EXPECT_GT(dec.ppn, 0.0);
  }
}

TEST(FiniteNorm, ZeroAndScaling) {
  GridSpec g{1, 8, 32};
  DecomposeConfig cfg{0.5, 0.5, 1};
  Atom zero{g, lattice_cube(1, 0), {}, 1.0, 0.5, inf, 1, true};
  EXPECT_TRUE(finite_norm_equivalence({{1.0, zero}}, cfg, 0.25).degenerate);
  auto a = make_atom(g, Cube{1, {-0.5, 0}, 0.5}, {0.5, inf, 1, true}, 4);
  auto b = make_atom(g, Cube{1, {1, 0}, 1.0}, {0.5, inf, 1, true}, 5);
  auto r1 = finite_norm_equivalence({{1.0, a}, {0.5, b}}, cfg, 0.25);
  auto r2 = finite_norm_equivalence({{2.0, a}, {1.0, b}}, cfg, 0.25);
  EXPECT_GT(r1.ratio, 0);
  EXPECT_LE(r1.upper, r1.given);
  EXPECT_NEAR(r1.ratio, r2.ratio, 1e-9 * r1.ratio);
}
