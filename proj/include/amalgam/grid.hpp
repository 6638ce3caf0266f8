#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "errors.hpp"

namespace amalgam {

using cplx = std::complex<double>;
using Point = std::array<double, 2>;

inline constexpr double inf = std::numeric_limits<double>::infinity();

inline double length(const Point& x, int dim) {
  return dim == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1]);
}

/// Cell-centered grid on the window [-L, L)^d, d in {1, 2}.
struct GridSpec {
  int dim = 1;
  int half_width = 8;  ///< L
  int per_unit = 64;   ///< M, cells per unit length
  int margin = -1;     ///< cells kept clear of the boundary; negative means M

  int n() const { return 2 * half_width * per_unit; }
  std::size_t size() const {
    auto m = static_cast<std::size_t>(n());
    return dim == 1 ? m : m * m;
  }
  double h() const { return 1.0 / per_unit; }
  double cell_volume() const { return dim == 1 ? h() : h() * h(); }
  int margin_cells() const { return margin < 0 ? per_unit : margin; }
  double center(int i) const { return -half_width + (i + 0.5) * h(); }

  std::array<int, 2> index(std::size_t flat) const {
    if (dim == 1) return {static_cast<int>(flat), 0};
    auto m = static_cast<std::size_t>(n());
    return {static_cast<int>(flat / m), static_cast<int>(flat % m)};
  }
  std::size_t flat(int i0, int i1 = 0) const {
    return dim == 1 ? static_cast<std::size_t>(i0)
                    : static_cast<std::size_t>(i0) * n() + i1;
  }
  Point point(std::size_t flat_index) const {
    auto [i0, i1] = index(flat_index);
    return {center(i0), dim == 2 ? center(i1) : 0.0};
  }

  void validate() const {
    require(dim == 1 || dim == 2, "grid.dim must be 1 or 2");
    require(half_width >= 1, "grid.L must be a positive integer");
    require(per_unit >= 8, "grid.M must be at least 8");
    require(margin_cells() < n() / 2, "grid.margin leaves no interior");
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Axis-parallel cube `corner + [0, side)^d`.
struct Cube {
  int dim = 1;
  Point corner{};
  double side = 1.0;

  double measure() const { return std::pow(side, dim); }
  double diameter() const { return side * std::sqrt(static_cast<double>(dim)); }
  Point center() const {
    return {corner[0] + side / 2, dim == 2 ? corner[1] + side / 2 : 0.0};
  }
  Cube dilate(double lambda) const {
    Point c = center();
    double s = lambda * side;
    return {dim, {c[0] - s / 2, dim == 2 ? c[1] - s / 2 : 0.0}, s};
  }
  bool contains(const Point& x) const {
    for (int a = 0; a < dim; ++a)
      if (x[a] < corner[a] || x[a] >= corner[a] + side) return false;
    return true;
  }
  /// Closed cubes meet.
  bool intersects(const Cube& o) const {
    for (int a = 0; a < dim; ++a)
      if (corner[a] > o.corner[a] + o.side || o.corner[a] > corner[a] + side) return false;
    return true;
  }
  /// Closed containment of `o` in this cube.
  bool encloses(const Cube& o) const {
    for (int a = 0; a < dim; ++a)
      if (o.corner[a] < corner[a] || o.corner[a] + o.side > corner[a] + side) return false;
    return true;
  }
  /// Smallest dilation factor lambda with `o` inside lambda * this (closed).
  double dilation_to_enclose(const Cube& o) const {
    Point c = center();
    double lam = 0;
    for (int a = 0; a < dim; ++a) {
      double reach = std::max(std::abs(o.corner[a] - c[a]), std::abs(o.corner[a] + o.side - c[a]));
      lam = std::max(lam, 2 * reach / side);
    }
    return lam;
  }
};

inline Cube lattice_cube(int dim, int k0, int k1 = 0) {
  return {dim, {static_cast<double>(k0), dim == 2 ? static_cast<double>(k1) : 0.0}, 1.0};
}

inline Cube cube_at(int dim, const Point& center, double side) {
  return {dim, {center[0] - side / 2, dim == 2 ? center[1] - side / 2 : 0.0}, side};
}

/// Half-open index box of cells, clipped to the window.
struct IndexBox {
  std::array<int, 2> lo{0, 0};
  std::array<int, 2> hi{0, 1};

  bool empty() const { return hi[0] <= lo[0] || hi[1] <= lo[1]; }
  std::size_t count() const {
    return empty() ? 0 : static_cast<std::size_t>(hi[0] - lo[0]) * (hi[1] - lo[1]);
  }
};

/// Cells whose centers lie in the half-open cube.
inline IndexBox cell_box(const GridSpec& g, const Cube& q) {
  IndexBox b;
  for (int a = 0; a < g.dim; ++a) {
    double lo = std::ceil((q.corner[a] + g.half_width) * g.per_unit - 0.5);
    double hi = std::ceil((q.corner[a] + q.side + g.half_width) * g.per_unit - 0.5);
    b.lo[a] = static_cast<int>(std::clamp(lo, 0.0, static_cast<double>(g.n())));
    b.hi[a] = static_cast<int>(std::clamp(hi, 0.0, static_cast<double>(g.n())));
  }
  if (g.dim == 1) b.lo[1] = 0, b.hi[1] = 1;
  return b;
}

template <class Fn>
void for_each_cell(const GridSpec& g, const IndexBox& b, Fn&& fn) {
  if (b.empty()) return;
  for (int i = b.lo[0]; i < b.hi[0]; ++i)
    for (int j = b.lo[1]; j < b.hi[1]; ++j) fn(g.flat(i, j));
}

inline std::vector<std::size_t> cells_in(const GridSpec& g, const Cube& q) {
  std::vector<std::size_t> out;
  auto b = cell_box(g, q);
  out.reserve(b.count());
  for_each_cell(g, b, [&](std::size_t c) { out.push_back(c); });
  return out;
}

inline double modulus(double v) { return std::abs(v); }
inline double modulus(const cplx& v) { return std::abs(v); }
inline bool is_finite(double v) { return std::isfinite(v); }
inline bool is_finite(const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

/// Values sampled at the cell centers of a grid.
template <class T>
class BasicField {
 public:
  using value_type = T;

  BasicField() = default;
  explicit BasicField(const GridSpec& g) : grid_(g), values_(g.size(), T{}) {}
  BasicField(const GridSpec& g, std::vector<T> values) : grid_(g), values_(std::move(values)) {
    require(values_.size() == g.size(), "field length does not match the grid");
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (!is_finite(values_[i])) throw non_finite_sample("non-finite value at cell " + std::to_string(i));
  }

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }
  std::vector<T>& values() { return values_; }
  const std::vector<T>& values() const { return values_; }

  BasicField& operator+=(const BasicField& o) {
    require(o.grid_ == grid_, "field grids differ");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  BasicField& operator-=(const BasicField& o) {
    require(o.grid_ == grid_, "field grids differ");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  BasicField& operator*=(T s) {
    for (auto& v : values_) v *= s;
    return *this;
  }
  friend BasicField operator+(BasicField a, const BasicField& b) { return a += b; }
  friend BasicField operator-(BasicField a, const BasicField& b) { return a -= b; }
  friend BasicField operator*(T s, BasicField a) { return a *= s; }

 private:
  GridSpec grid_;
  std::vector<T> values_;
};

using Field = BasicField<double>;
using ComplexField = BasicField<cplx>;

template <class T>
Field abs(const BasicField<T>& f) {
  Field out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = modulus(f[i]);
  return out;
}

inline ComplexField to_complex(const Field& f) {
  ComplexField out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i];
  return out;
}

inline Field real_part(const ComplexField& f) {
  Field out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i].real();
  return out;
}

template <class T>
double sup_norm(const BasicField<T>& f) {
  double m = 0;
  for (const auto& v : f.values()) m = std::max(m, modulus(v));
  return m;
}

/// Evaluates `fn(point)` at every cell center.
template <class Fn>
auto sample(const GridSpec& g, Fn&& fn) {
  using R = std::decay_t<decltype(fn(Point{}))>;
  using T = std::conditional_t<std::is_same_v<R, cplx>, cplx, double>;
  g.validate();
  BasicField<T> out(g);
  for (std::size_t i = 0; i < out.size(); ++i) {
    Point x = g.point(i);
    T v = static_cast<T>(fn(x));
    if (!is_finite(v)) {
      std::ostringstream msg;
      msg << "non-finite sample at x = (" << x[0];
      if (g.dim == 2) msg << ", " << x[1];
      msg << ")";
      throw non_finite_sample(msg.str());
    }
    out[i] = v;
  }
  return out;
}

inline Field indicator(const GridSpec& g, const Cube& q) {
  Field out(g);
  for_each_cell(g, cell_box(g, q), [&](std::size_t c) { out[c] = 1.0; });
  return out;
}

namespace detail {

template <class T, class Cells>
double lq_sum(const BasicField<T>& f, double q, const Cells& cells) {
  double s = 0;
  for (std::size_t c : cells) {
    double a = modulus(f[c]);
    if (a > 0) s += std::pow(a, q);
  }
  return s * f.grid().cell_volume();
}

}  // namespace detail

/// Midpoint-rule L^q (quasi-)norm over the whole window.
template <class T>
double lq_norm(const BasicField<T>& f, double q) {
  require(q > 0, "lq_norm needs q > 0");
  if (std::isinf(q)) return sup_norm(f);
  double s = 0;
  for (const auto& v : f.values()) {
    double a = modulus(v);
    if (a > 0) s += std::pow(a, q);
  }
  s *= f.grid().cell_volume();
  return s > 0 ? std::exp(std::log(s) / q) : 0.0;
}

/// Midpoint-rule L^q (quasi-)norm over the cells whose centers lie in `region`.
template <class T>
double lq_norm(const BasicField<T>& f, double q, const Cube& region) {
  require(q > 0, "lq_norm needs q > 0");
  auto cells = cells_in(f.grid(), region);
  if (std::isinf(q)) {
    double m = 0;
    for (std::size_t c : cells) m = std::max(m, modulus(f[c]));
    return m;
  }
  double s = detail::lq_sum(f, q, cells);
  return s > 0 ? std::exp(std::log(s) / q) : 0.0;
}

/// Sparse real field: values on a list of cells, zero elsewhere.
struct Patch {
  std::vector<std::size_t> cells;
  std::vector<double> values;

  std::size_t size() const { return cells.size(); }
  bool empty() const { return cells.empty(); }
  void push(std::size_t c, double v) {
    cells.push_back(c);
    values.push_back(v);
  }
  /// Adds `factor * values` into `f`.
  void add_to(Field& f, double factor = 1.0) const {
    for (std::size_t k = 0; k < cells.size(); ++k) f[cells[k]] += factor * values[k];
  }
  Field to_field(const GridSpec& g, double factor = 1.0) const {
    Field f(g);
    add_to(f, factor);
    return f;
  }
};

/// Nonzero cells of a field.
inline Patch support_patch(const Field& f) {
  Patch p;
  for (std::size_t c = 0; c < f.size(); ++c)
    if (f[c] != 0) p.push(c, f[c]);
  return p;
}

/// Max modulus over the boundary band of `margin_cells()` cells.
template <class T>
double margin_sup(const BasicField<T>& f) {
  const auto& g = f.grid();
  int m = g.margin_cells();
  double out = 0;
  for (std::size_t c = 0; c < f.size(); ++c) {
    auto idx = g.index(c);
    bool band = false;
    for (int a = 0; a < g.dim; ++a)
      if (idx[a] < m || idx[a] >= g.n() - m) band = true;
    if (band) out = std::max(out, modulus(f[c]));
  }
  return out;
}

}  // namespace amalgam
