#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "amalgam/convolve.hpp"
#include "amalgam/field_io.hpp"
#include "amalgam/grid.hpp"
#include "amalgam/mollifier.hpp"

using namespace amalgam;

namespace {

GridSpec line(int L = 2, int M = 8) { return {1, L, M}; }

Field random_field(const GridSpec& g, unsigned seed, double interior) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  return sample(g, [&](const Point& x) {
    return (length(x, g.dim) < interior) ? u(rng) : 0.0;
  });
}

}  // namespace

TEST(Sample, ZeroAndIndicator) {
  auto z = sample(line(), [](const Point&) { return 0.0; });
  EXPECT_EQ(sup_norm(z), 0.0);

  auto f = indicator(line(), lattice_cube(1, 0));
  int ones = 0;
  for (double v : f.values()) ones += v == 1.0;
  EXPECT_EQ(ones, 8);
  EXPECT_EQ(lq_norm(f, 1.0), 1.0);
}

TEST(Sample, GaussianAtCenters) {
  GridSpec g = line(2, 16);
  auto f = sample(g, [](const Point& x) { return std::exp(-x[0] * x[0]); });
  for (int i = 0; i < g.n(); ++i) {
    double x = -2 + (i + 0.5) / 16.0;
    EXPECT_NEAR(f[i], std::exp(-x * x), 1e-15);
  }
}

TEST(Sample, NonFiniteReportsLocation) {
  try {
    sample(line(), [](const Point& x) { return 1.0 / x[0] * (x[0] > 0.9 ? inf : 1.0); });
    FAIL();
  } catch (const non_finite_sample& e) {
    EXPECT_NE(std::string(e.what()).find("x = (0.9375"), std::string::npos);
  }
}

TEST(LqNorm, IndicatorValues) {
  auto f = indicator(line(), lattice_cube(1, 0));
  EXPECT_DOUBLE_EQ(lq_norm(f, 2.0, lattice_cube(1, 0)), 1.0);
  EXPECT_DOUBLE_EQ(lq_norm(f, 0.5), 1.0);
  EXPECT_EQ(lq_norm(f, inf), 1.0);
  EXPECT_EQ(lq_norm(f, 2.0, Cube{1, {5.0, 0}, 1.0}), 0.0);
}

TEST(LqNorm, MidpointRuleMatchesClosedForm) {
  for (int M : {8, 16, 32, 64}) {
    GridSpec g = line(2, M);
    auto f = sample(g, [](const Point& x) { return x[0]; });
    double v = lq_norm(f, 2.0, lattice_cube(1, 0));
    // midpoint error for x^2 on [0,1] is exactly h^2/12 in the square
    double h = 1.0 / M;
    EXPECT_NEAR(v * v, 1.0 / 3 - h * h / 12, 1e-14);
    EXPECT_LT(std::abs(v - 1 / std::sqrt(3.0)), h * h);
  }
}

TEST(LqNorm, WindowEqualsRegroupedCubes) {
  GridSpec g{2, 3, 8};
  auto f = random_field(g, 3, 2.5);
  for (double q : {0.3, 1.0, 2.5}) {
    double s = 0;
    for (int k0 = -3; k0 < 3; ++k0)
      for (int k1 = -3; k1 < 3; ++k1) s += std::pow(lq_norm(f, q, lattice_cube(2, k0, k1)), q);
    EXPECT_NEAR(std::pow(s, 1 / q), lq_norm(f, q), 1e-12 * lq_norm(f, q));
  }
}

TEST(Cube, Geometry) {
  Cube q{2, {0, 0}, 2};
  EXPECT_DOUBLE_EQ(q.measure(), 4);
  auto d = q.dilate(3);
  EXPECT_DOUBLE_EQ(d.side, 6);
  EXPECT_DOUBLE_EQ(d.center()[0], 1);
  EXPECT_TRUE(q.contains({0, 1.999}));
  EXPECT_FALSE(q.contains({2, 1}));
  EXPECT_TRUE(q.intersects(Cube{2, {2, 2}, 1}));
  EXPECT_FALSE(q.intersects(Cube{2, {2.1, 0}, 1}));
  EXPECT_DOUBLE_EQ(q.dilation_to_enclose(Cube{2, {2, 0}, 1}), 2.0);
  EXPECT_TRUE(q.dilate(2).encloses(Cube{2, {2, 0}, 1}));
}

TEST(Mollifier, UnitMassAgainstTanhSinh) {
  boost::math::quadrature::tanh_sinh<double> ts;
  double i1 = ts.integrate([](double x) { return bump_profile(x * x); }, -1.0, 1.0);
  EXPECT_NEAR(i1, 0.443993816168079, 1e-13);
  EXPECT_NEAR(bump_constant(1) * i1, 1.0, 1e-12);
  double i2 = 2 * std::numbers::pi * ts.integrate([](double r) { return r * bump_profile(r * r); }, 0.0, 1.0);
  EXPECT_NEAR(bump_constant(2) * i2, 1.0, 1e-12);
}

TEST(Mollifier, DerivativesMatchClosedForm) {
  // phi' = phi * (-2x / (1 - x^2)^2); phi'' by central difference of the closed form
  auto d1 = [](double x) {
    return bump({x, 0}, 1) * (-2 * x / std::pow(1 - x * x, 2));
  };
  for (double x : {-0.9, -0.3, 0.0, 0.4, 0.75}) {
    auto t = bump_derivatives({x, 0}, 1, 3);
    EXPECT_NEAR(t[0], bump({x, 0}, 1), 1e-14);
    EXPECT_NEAR(t[1], d1(x), 1e-12 * (1 + std::abs(d1(x))));
    double e = 1e-5;
    double d2 = (d1(x + e) - d1(x - e)) / (2 * e);
    EXPECT_NEAR(t[2], d2, 1e-6 * (1 + std::abs(d2)));
  }
  // 2D mixed derivative against nested differences
  Point y{0.3, -0.2};
  double e = 1e-4;
  auto phi = [](double a, double b) { return bump({a, b}, 2); };
  double fxy = (phi(y[0] + e, y[1] + e) - phi(y[0] + e, y[1] - e) - phi(y[0] - e, y[1] + e) +
                phi(y[0] - e, y[1] - e)) / (4 * e * e);
  EXPECT_NEAR(bump_derivative(y, 2, {1, 1}), fxy, 1e-6 * std::abs(fxy));
  EXPECT_EQ(bump_derivative({0.9999, 0}, 1, {2, 0}), 0.0);
}

TEST(Convolve, ConstantIsPreserved) {
  GridSpec g = line(4, 16);
  auto one = sample(g, [](const Point&) { return 1.0; });
  for (double t : {0.25, 0.5, 1.0, 2.0}) {
    auto r = convolve_dilated(one, standard_bump_kernel(1), t, {false});
    for (double v : r.values()) EXPECT_NEAR(v, 1.0, 1e-13);
  }
}

TEST(Convolve, TaylorRemainderOnQuadratic) {
  // f = x^2 near the origin: f * phi_t - f = t^2 * int y^2 phi(y) dy exactly
  GridSpec g{1, 8, 64};
  auto f = sample(g, [](const Point& x) {
    double r = std::abs(x[0]);
    return r < 4 ? x[0] * x[0] * smooth_step_down(r, 2.0, 4.0) : 0.0;
  });
  boost::math::quadrature::tanh_sinh<double> ts;
  double m2 = bump_constant(1) * ts.integrate([](double y) { return y * y * bump_profile(y * y); }, -1.0, 1.0);
  for (double t : {4 * g.h(), 0.25}) {
    auto r = convolve_dilated(f, standard_bump_kernel(1), t);
    double worst = 0;
    for (int i = 0; i < g.n(); ++i)
      if (std::abs(g.center(i)) < 1) worst = std::max(worst, std::abs(r[i] - f[i] - t * t * m2));
    EXPECT_LT(worst, 0.05 * t * t * m2);
  }
}

TEST(Convolve, ShiftEquivarianceAndLinearity) {
  GridSpec g = line(4, 16);
  auto f = random_field(g, 1, 2.0), u = random_field(g, 2, 2.0);
  Field s(g);
  for (int i = 1; i < g.n(); ++i) s[i] = f[i - 1];
  auto k = standard_bump_kernel(1);
  auto a = convolve_dilated(f, k, 0.5), b = convolve_dilated(s, k, 0.5);
  for (int i = 1; i < g.n(); ++i) EXPECT_NEAR(b[i], a[i - 1], 1e-14);

  auto c = convolve_dilated(2.0 * f + (-3.0) * u, k, 0.5);
  auto cu = convolve_dilated(u, k, 0.5);
  double err = 0;
  for (int i = 0; i < g.n(); ++i) err = std::max(err, std::abs(c[i] - 2 * a[i] + 3 * cu[i]));
  EXPECT_LE(err, 1e-12 * (sup_norm(f) + sup_norm(u)));
}

TEST(Convolve, Errors) {
  GridSpec g = line(2, 16);
  auto f = random_field(g, 1, 0.5);
  EXPECT_THROW(convolve_dilated(f, standard_bump_kernel(1), 3 * g.h()), under_resolved);
  auto edge = indicator(g, Cube{1, {-2, 0}, 0.5});
  EXPECT_THROW(convolve_dilated(edge, standard_bump_kernel(1), 0.5), wrap_risk);
  EXPECT_NO_THROW(convolve_dilated(edge, standard_bump_kernel(1), 0.5, {false}));
}

TEST(FieldIo, RoundTrip) {
  auto dir = std::filesystem::temp_directory_path() / "amalgam_io_test";
  std::filesystem::create_directories(dir);
  GridSpec g{2, 2, 8};
  auto f = random_field(g, 9, 0.7);
  write_field((dir / "f.bin").string(), f);
  auto r = read_field((dir / "f.bin").string());
  EXPECT_EQ(r.grid(), g);
  EXPECT_EQ(r.values(), f.values());
  ComplexField c = to_complex(f);
  c[3] = {1.5, -2.0};
  write_field((dir / "c.bin").string(), c);
  bool was_complex = false;
  auto any = read_field_any((dir / "c.bin").string(), &was_complex);
  EXPECT_TRUE(was_complex);
  EXPECT_EQ(any.values(), c.values());
  std::filesystem::remove_all(dir);
}
