#include "corpus.hpp"

#include <cmath>

#include "amalgam/mollifier.hpp"
#include "amalgam/multi_index.hpp"
#include "config.hpp"

namespace amalgam::lab {

Rng stream(std::uint64_t seed, const std::string& name) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(std::stoull(fnv1a_hex(name).substr(0, 8), nullptr, 16))};
  return Rng(seq);
}

Field smooth_field(const GridSpec& g, Rng& rng) {
  std::uniform_int_distribution<int> count(1, 4);
  std::uniform_real_distribution<double> radius(0.3, 1.5), amp(0.2, 2.0), unit(0, 1), phase(0, 6.283185307179586);
  const double inner = g.half_width - g.margin_cells() * g.h();
  struct Blob {
    Point c;
    double r, a;
  };
  std::vector<Blob> blobs;
  for (int n = count(rng); n > 0; --n) {
    double r = std::min(radius(rng), 0.45 * inner);
    std::uniform_real_distribution<double> pos(-inner + r, inner - r);
    Point c{pos(rng), g.dim == 2 ? pos(rng) : 0.0};
    double a = amp(rng) * (unit(rng) < 0.3 ? -1 : 1);
    blobs.push_back({c, r, a});
  }
  const double w = phase(rng), k = 0.5 + unit(rng);
  return sample(g, [&](const Point& x) {
    double s = 0;
    for (const auto& b : blobs) {
      Point y{(x[0] - b.c[0]) / b.r, (x[1] - b.c[1]) / b.r};
      s += b.a * bump(y, g.dim);
    }
    return s * (1 + 0.3 * std::sin(k * x[0] + w));
  });
}

Field rough_field(const GridSpec& g, Rng& rng, bool nonneg) {
  Field f(g);
  std::uniform_real_distribution<double> unit(0, 1), val(-1, 1), decade(-3, 3);
  const int L = g.half_width;
  for (int a = -L; a < L; ++a)
    for (int b = -L; b < (g.dim == 2 ? L : -L + 1); ++b) {
      if (unit(rng) < 0.4) continue;
      const double scale = std::pow(10.0, decade(rng));
      for_each_cell(g, cell_box(g, lattice_cube(g.dim, a, g.dim == 2 ? b : 0)), [&](std::size_t c) {
        double v = val(rng);
        f[c] = scale * (nonneg ? std::abs(v) : v);
      });
    }
  return f;
}

double dyadic_side(Rng& rng, double lo, double hi) {
  const int a = static_cast<int>(std::lround(std::log2(lo))), b = static_cast<int>(std::lround(std::log2(hi)));
  std::uniform_int_distribution<int> e(a, b);
  return std::ldexp(1.0, e(rng));
}

Cube random_cube(const GridSpec& g, Rng& rng, double side) {
  const int cells = static_cast<int>(std::lround(side * g.per_unit));
  const int lo = g.margin_cells(), hi = g.n() - g.margin_cells() - cells;
  require(cells >= 1 && hi >= lo, "cube does not fit inside the margin");
  std::uniform_int_distribution<int> pos(lo, hi);
  Point corner{};
  for (int a = 0; a < g.dim; ++a) corner[a] = -g.half_width + pos(rng) * g.h();
  return {g.dim, corner, side};
}

Atom random_atom(const GridSpec& g, Rng& rng, const Cube& cube, const AtomConfig& cfg) {
  return make_atom(g, cube, cfg, rng());
}

Field random_polynomial(const GridSpec& g, Rng& rng, int degree) {
  std::uniform_real_distribution<double> coef(-1, 1);
  auto idx = multi_indices(g.dim, degree);
  std::vector<double> c(idx.size());
  for (auto& x : c) x = coef(rng);
  const double L = g.half_width;
  return sample(g, [&](const Point& x) {
    double s = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      double m = c[k];
      for (int a = 0; a < g.dim; ++a) m *= std::pow(x[a] / L, idx[k][a]);
      s += m;
    }
    return s;
  });
}

}  // namespace amalgam::lab
