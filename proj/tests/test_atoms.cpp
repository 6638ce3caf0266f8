#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "amalgam/atoms.hpp"
#include "amalgam/polynomial.hpp"

using namespace amalgam;

namespace {

Patch cube_weight(const GridSpec& g, const Cube& q, bool bumpy) {
  Patch w;
  for (std::size_t c : cells_in(g, q)) {
    Point x = g.point(c);
    double v = bumpy ? 1 + 0.5 * std::sin(3 * x[0]) * std::cos(2 * x[1]) : 1.0;
    w.push(c, v);
  }
  return w;
}

}  // namespace

TEST(Projection, ReproducesPolynomials) {
  for (int dim : {1, 2}) {
    GridSpec g{dim, 4, 16};
    Cube q{dim, {-0.5, -0.25}, 1.5};
    auto w = cube_weight(g, q, true);
    std::vector<double> v;
    for (std::size_t c : w.cells) {
      Point x = g.point(c);
      v.push_back(1 - 2 * x[0] + 0.5 * x[0] * x[0] + (dim == 2 ? 3 * x[1] * x[0] - x[1] * x[1] : 0.0));
    }
    auto pr = project_poly(g, v, w, 2, q.center(), q.side);
    for (std::size_t i = 0; i < v.size(); ++i) {
      EXPECT_NEAR(pr.on_cells[i], v[i], 1e-12);
      EXPECT_NEAR(pr.poly(g.point(w.cells[i])), v[i], 1e-12);
    }
    EXPECT_FALSE(pr.ill_conditioned);
  }
}

TEST(Projection, DegreeZeroIsWeightedMean) {
  GridSpec g{1, 4, 16};
  Cube q{1, {0, 0}, 1};
  auto w = cube_weight(g, q, true);
  std::vector<double> v;
  double num = 0, den = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    double x = g.point(w.cells[i])[0];
    v.push_back(std::exp(x));
    num += std::exp(x) * w.values[i];
    den += w.values[i];
  }
  auto pr = project_poly(g, v, w, 0, q.center(), q.side);
  EXPECT_NEAR(pr.poly.coeffs[0], num / den, 1e-14);
}

TEST(Projection, OrthogonalInputGivesZeroAndResidualMomentsVanish) {
  GridSpec g{2, 4, 16};
  Cube q{2, {0, 0}, 1};
  auto w = cube_weight(g, q, false);
  // Legendre-like: on a symmetric cell set x^3 - (mean) is odd, orthogonal to P_1? use sign pattern
  std::vector<double> odd;
  for (std::size_t c : w.cells) {
    Point x = g.point(c);
    Point y{x[0] - 0.5, x[1] - 0.5};
    odd.push_back(y[0] * y[1]);  // orthogonal to 1, y0, y1 under the symmetric uniform weight
  }
  auto pr = project_poly(g, odd, w, 1, q.center(), q.side);
  for (double c : pr.poly.coeffs) EXPECT_NEAR(c, 0.0, 1e-14);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  auto bw = cube_weight(g, q, true);
  std::vector<double> v(bw.size());
  for (auto& x : v) x = nd(rng);
  auto p2 = project_poly(g, v, bw, 2, q.center(), q.side);
  std::vector<double> res(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) res[i] = v[i] - p2.on_cells[i];
  for (double m : weighted_moments(g, res, bw, 2, q.center(), q.side)) EXPECT_LT(std::abs(m), 1e-14);
}

TEST(Projection, DegenerateCases) {
  GridSpec g{1, 4, 16};
  Patch w;
  w.push(100, 0.0);
  EXPECT_THROW(project_poly(g, {1.0}, w, 0, {0, 0}, 1), degenerate_weight);
  // a single cell cannot carry degree 2: rank drops, moments still vanish
  Patch one;
  one.push(70, 1.0);
  auto pr = project_poly(g, {3.0}, one, 2, g.point(70), 1.0 / 16);
  EXPECT_EQ(pr.rank, 1);
  EXPECT_NEAR(pr.on_cells[0], 3.0, 1e-14);
  EXPECT_TRUE(pr.ill_conditioned);
}

TEST(Atom, IndicatorIsValidLocalAtom) {
  GridSpec g{1, 4, 16};
  for (double q : {0.3, 0.5, 1.0}) {
    auto a = make_atom_from(indicator(g, lattice_cube(1, 0)), lattice_cube(1, 0), q, inf, 3, true);
    auto rep = validate_atom(a);
    EXPECT_TRUE(rep.valid());
    EXPECT_FALSE(rep.moments_required);
  }
}

TEST(Atom, HaarAtom) {
  GridSpec g{1, 4, 16};
  double q = 0.5;
  Cube cube{1, {0, 0}, 0.5};
  auto f = std::pow(2.0, 1 / q) * (indicator(g, Cube{1, {0, 0}, 0.25}) - indicator(g, Cube{1, {0.25, 0}, 0.25}));
  auto ok = validate_atom(make_atom_from(f, cube, q, inf, 0, true));
  EXPECT_TRUE(ok.valid());
  EXPECT_NEAR(ok.size_ratio, 1.0, 1e-15);
  EXPECT_EQ(ok.worst_moment, 0.0);

  auto bad = validate_atom(make_atom_from(f, cube, q, inf, 1, true));
  EXPECT_FALSE(bad.moments_ok);
  // int (x - 1/4) a dx = -2^{1/q} / 16
  EXPECT_NEAR(bad.worst_moment, std::pow(2.0, 1 / q) / 16, 1e-14);
  EXPECT_NE(bad.violation.find("order 1"), std::string::npos);
}

TEST(Atom, SupportAndSizeViolations) {
  GridSpec g{1, 4, 16};
  auto f = indicator(g, Cube{1, {0, 0}, 1.5});
  EXPECT_FALSE(validate_atom(make_atom_from(f, lattice_cube(1, 0), 1, inf, 0, true)).support_ok);
  auto big = 2.0 * indicator(g, lattice_cube(1, 0));
  EXPECT_FALSE(validate_atom(make_atom_from(big, lattice_cube(1, 0), 1, inf, 0, true)).size_ok);
}

TEST(Atom, GeneratedAtomsValidate) {
  for (int dim : {1, 2}) {
    GridSpec g = dim == 1 ? GridSpec{1, 16, 64} : GridSpec{2, 4, 16};
    std::mt19937_64 rng(dim);
    std::vector<double> sides = dim == 1 ? std::vector<double>{1.0 / 16, 0.25, 0.5, 1, 4, 16}
                                         : std::vector<double>{0.25, 0.5, 1, 2};
    int n = 0;
    for (double side : sides)
      for (int delta : {0, 1, 2})
        for (double r : {2.0, inf}) {
          std::uniform_real_distribution<double> u(-g.half_width + 1, g.half_width - 1 - side);
          Cube cube{dim, {std::round(u(rng) * 64) / 64, dim == 2 ? std::round(u(rng) * 64) / 64 : 0.0}, side};
          auto a = make_atom(g, cube, {0.5, r, delta, true}, 1000 + n++);
          auto rep = validate_atom(a);
          EXPECT_TRUE(rep.valid()) << rep.violation << " side " << side << " delta " << delta;
          EXPECT_NEAR(rep.size_ratio, 1.0, 1e-9);
          if (rep.moments_required) EXPECT_LE(rep.worst_moment, 1e-10 * lq_norm(a.field(), 1.0));
        }
  }
}

TEST(Atom, DeltaTwoMomentsByDirectQuadrature) {
  GridSpec g{1, 8, 64};
  Cube cube{1, {0.25, 0}, 0.5};
  auto a = make_atom(g, cube, {0.5, inf, 2, true}, 42);
  auto f = a.field();
  for (int b = 0; b <= 2; ++b) {
    double m = 0;
    for (int i = 0; i < g.n(); ++i) m += std::pow(g.center(i), b) * f[i] * g.h();
    EXPECT_LT(std::abs(m), 1e-10);
  }
}

TEST(Atom, LargeLocalCubeSkipsMoments) {
  GridSpec g{1, 8, 64};
  auto a = make_atom(g, Cube{1, {-1, 0}, 2}, {0.5, inf, 1, true}, 3);
  auto rep = validate_atom(a);
  EXPECT_FALSE(rep.moments_required);
  EXPECT_TRUE(rep.valid());
}

TEST(AtomBound, ZeroAndHomogeneity) {
  GridSpec g{1, 8, 64};
  Atom zero{g, lattice_cube(1, 0), {}, 1.0, 0.5, inf, 1, true};
  auto rz = atom_uniform_bound({zero}, 0.5, 0.5);
  EXPECT_EQ(rz.sup, 0.0);
  auto a = make_atom(g, Cube{1, {0, 0}, 0.5}, {0.5, inf, 1, true}, 9);
  Atom twice = a;
  twice.scale /= 2;
  auto r = atom_uniform_bound({a, twice}, 0.5, 0.5);
  EXPECT_NEAR(r.norms[1], 2 * r.norms[0], 1e-12 * r.norms[1]);
}

TEST(AtomBound, PointwiseDominationIsFinite) {
  GridSpec g{1, 8, 64};
  for (double side : {0.25, 0.5, 2.0}) {
    auto a = make_atom(g, Cube{1, {0, 0}, side}, {0.5, inf, 1, true}, 5);
    double c = atom_domination_constant(a);
    EXPECT_TRUE(std::isfinite(c));
    EXPECT_GE(c, 0);
  }
}

TEST(Molecule, AtomsAreMolecules) {
  GridSpec g{1, 8, 64};
  auto a = make_atom(g, Cube{1, {0, 0}, 0.5}, {0.5, inf, 1, true}, 1);
  for (double theta : {0.5, 3.0, 10.0}) EXPECT_TRUE(validate_molecule(as_molecule(a, theta)).valid());
}

TEST(Molecule, SizeAndDecayViolations) {
  GridSpec g{1, 8, 64};
  Cube q{1, {-0.5, 0}, 1};
  auto big = 3.0 * indicator(g, q);
  EXPECT_FALSE(validate_molecule({big, q, 1, inf, 0}).size_ok);
  const double theta = 3;
  auto tail = sample(g, [&](const Point& x) {
    return std::pow(1 + std::abs(x[0]), -theta / 2) * smooth_step_down(std::abs(x[0]), 5, 6.5);
  });
  auto rep = validate_molecule({tail, q, 1, inf, 0, theta});
  EXPECT_TRUE(rep.size_ok);
  EXPECT_FALSE(rep.decay_ok);
}
