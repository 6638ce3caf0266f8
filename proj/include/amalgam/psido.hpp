#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "atoms.hpp"
#include "convolve.hpp"
#include "maximal.hpp"

namespace amalgam {

using SpatialFn = std::function<cplx(const Point&)>;

/// One product term a(x) m(xi); an empty factor stands for 1.
struct SymbolTerm {
  SpatialFn a, m;
};

/// Symbol psi(x, xi), either a finite sum of product terms or a general
/// function of (x, xi), with its declared class S^mu_{rho, sigma}.
struct Symbol {
  std::string name;
  int dim = 1;
  std::vector<SymbolTerm> terms;
  std::function<cplx(const Point&, const Point&)> general;  ///< used when `terms` is empty
  double mu = 0, rho = 1, sigma = 0;

  bool separable() const { return !terms.empty(); }
  bool x_only() const {
    return separable() && std::all_of(terms.begin(), terms.end(), [](const SymbolTerm& t) { return !t.m; });
  }
  bool multiplier() const {
    return separable() && std::all_of(terms.begin(), terms.end(), [](const SymbolTerm& t) { return !t.a; });
  }

  cplx operator()(const Point& x, const Point& xi) const {
    if (!separable()) return general(x, xi);
    cplx s = 0;
    for (const auto& t : terms) s += (t.a ? t.a(x) : cplx{1}) * (t.m ? t.m(xi) : cplx{1});
    return s;
  }
};

inline Symbol identity_symbol(int dim) { return {"identity", dim, {SymbolTerm{}}, {}}; }

inline Symbol multiplier_symbol(int dim, SpatialFn m, std::string name = "multiplier") {
  return {std::move(name), dim, {SymbolTerm{{}, std::move(m)}}, {}};
}

inline Symbol x_symbol(int dim, SpatialFn a, std::string name = "x-only") {
  return {std::move(name), dim, {SymbolTerm{std::move(a), {}}}, {}};
}

/// (1 + |xi|^2)^{-1/2} (1 + cos(pi x_1 / L) / 2).
inline Symbol bessel_symbol(int dim, double L) {
  Symbol s{"bessel", dim, {}, {}};
  s.terms.push_back({[L](const Point& x) { return cplx{1 + 0.5 * std::cos(M_PI * x[0] / L)}; },
                     [dim](const Point& xi) {
                       double r = length(xi, dim);
                       return cplx{1 / std::sqrt(1 + r * r)};
                     }});
  return s;
}

/// -i xi_1 / |xi|, smoothly switched off on |xi| <= cutoff.
inline Symbol riesz_symbol(int dim, double cutoff) {
  return multiplier_symbol(
      dim,
      [dim, cutoff](const Point& xi) {
        double r = length(xi, dim);
        if (r <= cutoff) return cplx{};
        return cplx{0, -xi[0] / r * (1 - smooth_step_down(r, cutoff, 2 * cutoff))};
      },
      "riesz");
}

/// Non-separable S^0 symbol (1 + i c(x) xi_1) / (1 + c(x)^2 |xi|^2)^{1/2}.
inline Symbol variable_symbol(int dim, double L) {
  Symbol s{"variable", dim, {}, {}};
  s.general = [dim, L](const Point& x, const Point& xi) {
    double c = 1 + 0.5 * std::cos(M_PI * x[0] / L) + (dim == 2 ? 0.25 * std::sin(M_PI * x[1] / L) : 0.0);
    double r = length(xi, dim);
    return cplx{1, c * xi[0]} / std::sqrt(1 + c * c * r * r);
  };
  return s;
}

/// xi_1, an order-one symbol.
inline Symbol order_one_symbol(int dim) {
  return multiplier_symbol(dim, [](const Point& xi) { return cplx{xi[0]}; }, "order-one");
}

/// cos(2 pi xi_1): bounded, but its xi-derivatives do not decay.
inline Symbol oscillating_symbol(int dim) {
  return multiplier_symbol(dim, [](const Point& xi) { return cplx{std::cos(2 * M_PI * xi[0])}; }, "oscillating");
}

namespace detail {

inline std::vector<cplx> twiddles(int n) {
  std::vector<cplx> w(n);
  for (int k = 0; k < n; ++k) w[k] = std::polar(1.0, 2 * M_PI * k / n);
  return w;
}

template <class T>
ComplexField as_complex(const BasicField<T>& f) {
  if constexpr (std::is_same_v<T, cplx>)
    return f;
  else
    return to_complex(f);
}

/// Real field when every imaginary part is exactly zero.
inline std::optional<Field> exactly_real(const ComplexField& f) {
  for (const auto& v : f.values())
    if (v.imag() != 0) return std::nullopt;
  return real_part(f);
}

}  // namespace detail

enum class PsidoPath { automatic, direct };

/// T f(x) = sum_xi psi(x, xi) e^{2 pi i x xi} f^(xi) dxi over the torus
/// frequency lattice xi = k / 2L. Separable symbols go through one FFT per
/// term; general symbols are summed directly, with psi tabulated when the
/// table fits.
class PsidoOperator {
 public:
  PsidoOperator(Symbol sym, const GridSpec& g, bool check_margin = true)
      : sym_(std::move(sym)), grid_(g), check_margin_(check_margin) {
    require(sym_.dim == g.dim, "symbol and grid dimensions differ");
    require(sym_.separable() || static_cast<bool>(sym_.general), "symbol has no evaluator");
    const std::size_t N = g.size();
    if (!sym_.separable() && N * N <= (std::size_t{1} << 22)) {
      table_.resize(N * N);
      for (std::size_t i = 0; i < N; ++i) {
        Point x = g.point(i);
        for (std::size_t k = 0; k < N; ++k) table_[i * N + k] = sym_(x, fft::frequency(g, k));
      }
    }
  }

  const Symbol& symbol() const { return sym_; }
  const GridSpec& grid() const { return grid_; }

  template <class T>
  ComplexField operator()(const BasicField<T>& f, PsidoPath path = PsidoPath::automatic) const {
    require(f.grid() == grid_, "field and operator grids differ");
    if (check_margin_ && margin_sup(f) > 0)
      throw wrap_risk("field support reaches the boundary margin");
    ComplexField in = detail::as_complex(f);
    if (path == PsidoPath::automatic && sym_.x_only()) return apply_x_only(in);
    if (path == PsidoPath::automatic && sym_.separable()) return apply_separable(in);
    return apply_direct(in);
  }

 private:
  ComplexField apply_x_only(const ComplexField& f) const {
    ComplexField out(grid_);
    for (const auto& t : sym_.terms)
      for (std::size_t i = 0; i < f.size(); ++i) out[i] += (t.a ? t.a(grid_.point(i)) : cplx{1}) * f[i];
    return out;
  }

  ComplexField apply_separable(const ComplexField& f) const {
    const auto spec = fft::spectrum(f);
    ComplexField out(grid_);
    for (const auto& t : sym_.terms) {
      std::vector<cplx> w = spec;
      if (t.m) {
        for (std::size_t k = 0; k < w.size(); ++k) w[k] *= t.m(fft::frequency(grid_, k));
        fft::inverse(w, grid_);
      } else {
        w = f.values();
      }
      for (std::size_t i = 0; i < w.size(); ++i) out[i] += (t.a ? t.a(grid_.point(i)) : cplx{1}) * w[i];
    }
    return out;
  }

  ComplexField apply_direct(const ComplexField& f) const {
    const auto spec = fft::spectrum(f);
    const int n = grid_.n();
    const std::size_t N = grid_.size();
    const auto tw = detail::twiddles(n);
    ComplexField out(grid_);
    std::vector<cplx> row(N);
    for (std::size_t i = 0; i < N; ++i) {
      auto [i0, i1] = grid_.index(i);
      if (!table_.empty()) {
        std::copy_n(table_.begin() + i * N, N, row.begin());
      } else {
        Point x = grid_.point(i);
        for (std::size_t k = 0; k < N; ++k) row[k] = sym_(x, fft::frequency(grid_, k));
      }
      cplx s = 0;
      for (std::size_t k = 0; k < N; ++k) {
        auto [k0, k1] = grid_.index(k);
        cplx e = tw[(static_cast<long>(i0) * k0) % n];
        if (grid_.dim == 2) e *= tw[(static_cast<long>(i1) * k1) % n];
        s += row[k] * e * spec[k];
      }
      out[i] = s / static_cast<double>(N);
    }
    return out;
  }

  Symbol sym_;
  GridSpec grid_;
  bool check_margin_;
  std::vector<cplx> table_;
};

template <class T>
ComplexField apply_psido(const Symbol& sym, const BasicField<T>& f, PsidoPath path = PsidoPath::automatic) {
  return PsidoOperator(sym, f.grid())(f, path);
}

// ---------------------------------------------------------------------------
// Kernels

struct KernelOptions {
  int pad = 1;                      ///< frequency lattice refined by this factor
  MultiIndex beta{0, 0};            ///< z-derivative order
  double t = 0;                     ///< smoothing scale; 0 means none
  std::optional<Kernel> mollifier;  ///< phi for K_t = phi_t * K; the bump by default
};

/// K(x, z) = sum_xi psi(x, xi) e^{2 pi i z xi} dxi for selected rows x, on the
/// torus offsets z of the (padded) grid.
struct KernelRows {
  GridSpec grid;    ///< grid of the x rows
  GridSpec padded;  ///< offsets z live on this torus
  std::vector<std::size_t> rows;
  std::vector<std::vector<cplx>> values;  ///< values[r][offset flat index]
};

inline KernelRows psido_kernel(const Symbol& sym, const GridSpec& g, std::vector<std::size_t> rows,
                               const KernelOptions& opt = {}) {
  require(opt.pad >= 1, "kernel padding must be at least 1");
  require(opt.t >= 0, "smoothing scale must be nonnegative");
  KernelRows out{g, g, std::move(rows), {}};
  out.padded.half_width = g.half_width * opt.pad;
  const GridSpec& gp = out.padded;
  const std::size_t N = gp.size();
  std::vector<cplx> factor(N, cplx{1});
  for (std::size_t k = 0; k < N; ++k) {
    Point xi = fft::frequency(gp, k);
    auto idx = gp.index(k);
    for (int a = 0; a < g.dim; ++a) {
      for (int b = 0; b < opt.beta[a]; ++b) factor[k] *= cplx{0, 2 * M_PI * xi[a]};
      // the unpaired Nyquist mode has no odd derivative
      if (opt.beta[a] % 2 == 1 && idx[a] == gp.n() / 2) factor[k] = 0;
    }
  }
  if (opt.t > 0) {
    auto phi = kernel_spectrum(opt.mollifier ? *opt.mollifier : standard_bump_kernel(g.dim), gp, opt.t);
    for (std::size_t k = 0; k < N; ++k) factor[k] *= phi[k];
  }
  // N * dxi = M^d
  const double norm = static_cast<double>(N) / std::pow(2.0 * gp.half_width, g.dim);
  for (std::size_t r : out.rows) {
    require(r < g.size(), "kernel row outside the grid");
    Point x = g.point(r);
    std::vector<cplx> v(N);
    for (std::size_t k = 0; k < N; ++k) v[k] = sym(x, fft::frequency(gp, k)) * factor[k];
    fft::inverse(v, gp);
    for (auto& c : v) c *= norm;
    out.values.push_back(std::move(v));
  }
  return out;
}

inline std::vector<std::size_t> all_rows(const GridSpec& g) {
  std::vector<std::size_t> r(g.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = i;
  return r;
}

/// T f(x) = sum_y K(x, x - y) f(y) h^d at the kernel rows; needs pad = 1.
template <class T>
std::vector<cplx> kernel_apply(const KernelRows& k, const BasicField<T>& f) {
  require(k.padded == k.grid, "kernel quadrature needs an unpadded kernel");
  require(f.grid() == k.grid, "field and kernel grids differ");
  const auto& g = k.grid;
  const int n = g.n();
  std::vector<cplx> out;
  for (std::size_t r = 0; r < k.rows.size(); ++r) {
    auto [i0, i1] = g.index(k.rows[r]);
    cplx s = 0;
    for (std::size_t j = 0; j < f.size(); ++j) {
      auto [j0, j1] = g.index(j);
      std::size_t off = g.flat(((i0 - j0) % n + n) % n, g.dim == 2 ? ((i1 - j1) % n + n) % n : 0);
      s += k.values[r][off] * f[j];
    }
    out.push_back(s * g.cell_volume());
  }
  return out;
}

struct TailFit {
  double exponent = 0;  ///< s in C |z|^{-s}
  double C = 0;         ///< max |K| |z|^s over the fit range
  double slope = 0;     ///< least-squares slope of log shell-max |K| against log |z|
  std::vector<std::pair<double, double>> series;  ///< (|z|, shell max |K|)
};

/// Power-law tail fit over rmin <= |z| <= rmax in log-spaced shells,
/// maximized over the kernel rows.
inline TailFit fit_tail(const KernelRows& k, double exponent, double rmin, double rmax, int shells = 12) {
  require(rmin > 0 && rmax > rmin && shells >= 2, "tail fit range is empty");
  TailFit fit;
  fit.exponent = exponent;
  const auto& gp = k.padded;
  const double lr0 = std::log(rmin), step = (std::log(rmax) - lr0) / shells;
  std::vector<double> best(shells, 0.0), where(shells, 0.0);
  for (std::size_t c = 0; c < gp.size(); ++c) {
    double r = length(fft::offset(gp, c), gp.dim);
    if (r < rmin || r > rmax) continue;
    int s = std::min(shells - 1, static_cast<int>((std::log(r) - lr0) / step));
    for (const auto& row : k.values) {
      double v = std::abs(row[c]);
      fit.C = std::max(fit.C, v * std::pow(r, exponent));
      if (v > best[s]) best[s] = v, where[s] = r;
    }
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int s = 0; s < shells; ++s) {
    if (!(best[s] > 0)) continue;
    fit.series.push_back({where[s], best[s]});
    double x = std::log(where[s]), y = std::log(best[s]);
    sx += x, sy += y, sxx += x * x, sxy += x * y, ++m;
  }
  if (m >= 2) fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return fit;
}

/// Default fit range |z| in [32 h, L / 2]; the lower end drops to L / 8 on
/// coarse grids where 32 h would close the range.
inline std::pair<double, double> tail_range(const GridSpec& g) {
  return {std::min(32 * g.h(), g.half_width / 8.0), g.half_width / 2.0};
}

/// Smallest smoothing scale whose bump multiplier is negligible at the
/// Nyquist frequency (16 h); below it K_t carries lattice-scale oscillation.
inline double resolved_smoothing(const GridSpec& g) { return 16 * g.h(); }

struct SmoothedKernelEntry {
  double t = 0;
  int beta = 0;  ///< derivative order along the first axis
  TailFit fit;   ///< against |z|^{-d-beta}
};

struct SmoothedKernelReport {
  std::vector<SmoothedKernelEntry> entries;
  std::vector<double> spread;  ///< per beta: max C / min C over t
};

/// Fitted constants of |d^beta_z K_t(x, z)| <= C |z|^{-d-beta} for K_t the
/// kernel of phi_t * T, over a grid of t.
inline SmoothedKernelReport smoothed_kernel_bounds(const Symbol& sym, const GridSpec& g, const Kernel& mollifier,
                                                   const std::vector<double>& ts,
                                                   const std::vector<std::size_t>& rows, int pad = 8,
                                                   int max_beta = 1) {
  for (double t : ts) require(t > 0 && t <= 1, "smoothing scale must lie in (0, 1]");
  SmoothedKernelReport rep;
  auto [r0, r1] = tail_range(g);
  for (int b = 0; b <= max_beta; ++b) {
    double lo = inf, hi = 0;
    for (double t : ts) {
      KernelOptions opt{pad, {b, 0}, t, mollifier};
      auto k = psido_kernel(sym, g, rows, opt);
      auto fit = fit_tail(k, g.dim + b, r0, r1);
      lo = std::min(lo, fit.C);
      hi = std::max(hi, fit.C);
      rep.entries.push_back({t, b, std::move(fit)});
    }
    rep.spread.push_back(lo > 0 ? hi / lo : inf);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Symbol seminorms

struct SeminormEntry {
  MultiIndex alpha{0, 0}, beta{0, 0};
  double C = 0;      ///< max |d^alpha_x d^beta_xi psi| (1 + |xi|)^{-mu - sigma|alpha| + rho|beta|}
  double slope = 0;  ///< growth of dyadic-shell maxima of the weighted derivative in log-log
  bool pass = true;
};

struct SeminormTable {
  std::vector<SeminormEntry> entries;
  bool in_class = true;
  std::string first_failure;
};

namespace detail {

inline double binomial(int k, int j) { return factorial(k) / (factorial(j) * factorial(k - j)); }

/// Sample points per axis: 0 and +-geometric values from lo to hi.
inline std::vector<double> geometric_axis(double lo, double hi, int count) {
  std::vector<double> v{0.0};
  for (int i = 0; i < count; ++i) {
    double x = lo * std::pow(hi / lo, count == 1 ? 0.0 : double(i) / (count - 1));
    v.push_back(x);
    v.push_back(-x);
  }
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace detail

/// Central finite-difference estimates of C_{alpha beta} for |alpha| <= max_alpha,
/// |beta| <= max_beta, with steps h in x and 1/2L in xi. An entry fails when
/// its weighted derivative grows across dyadic frequency shells with log-log
/// slope above `growth_tol`.
inline SeminormTable symbol_seminorms(const Symbol& sym, const GridSpec& g, int max_alpha, int max_beta,
                                      double growth_tol = 0.5) {
  if (max_alpha > 4 || max_beta > 4)
    throw under_resolved("finite differences above order 4 are not resolved on the grid");
  require(max_alpha >= 0 && max_beta >= 0, "derivative orders must be nonnegative");
  const int d = g.dim;
  const double sx = g.h(), sxi = 1.0 / (2.0 * g.half_width);
  const double xi_max = g.per_unit / 2.0 - 4 * sxi;

  std::vector<double> xs;
  {
    const int stride = std::max(1, g.n() / (d == 1 ? 32 : 8));
    for (int i = 0; i < g.n(); i += stride) xs.push_back(g.center(i));
  }
  const auto xis = detail::geometric_axis(sxi, xi_max, d == 1 ? 128 : 16);

  SeminormTable tab;
  for (const auto& alpha : multi_indices(d, max_alpha))
    for (const auto& beta : multi_indices(d, max_beta)) {
      SeminormEntry e{alpha, beta};
      const double expo = -sym.mu - sym.sigma * order(alpha) + sym.rho * order(beta);
      const int shells = static_cast<int>(std::floor(std::log2(xi_max))) + 1;
      std::vector<double> shell(std::max(shells, 1), 0.0);
      const std::array<int, 4> ord{alpha[0], alpha[1], beta[0], beta[1]};
      const std::array<double, 4> step{sx, sx, sxi, sxi};

      auto derivative = [&](const Point& x, const Point& xi) {
        cplx s = 0;
        std::array<int, 4> j{0, 0, 0, 0};
        while (true) {
          Point y = x, eta = xi;
          double w = 1;
          for (int a = 0; a < 4; ++a) {
            double shift = (ord[a] / 2.0 - j[a]) * step[a];
            if (a < 2) y[a] += shift; else eta[a - 2] += shift;
            w *= ((j[a] % 2) ? -1.0 : 1.0) * detail::binomial(ord[a], j[a]);
          }
          s += w * sym(y, eta);
          int a = 0;
          while (a < 4 && ++j[a] > ord[a]) j[a++] = 0;
          if (a == 4) break;
        }
        double scale = 1;
        for (int a = 0; a < 4; ++a) scale *= std::pow(step[a], ord[a]);
        return std::abs(s) / scale;
      };

      for (std::size_t ix = 0; ix < xs.size(); ++ix)
        for (std::size_t jx = 0; jx < (d == 2 ? xs.size() : 1); ++jx) {
          Point x{xs[ix], d == 2 ? xs[jx] : 0.0};
          for (std::size_t a = 0; a < xis.size(); ++a)
            for (std::size_t b = 0; b < (d == 2 ? xis.size() : 1); ++b) {
              Point xi{xis[a], d == 2 ? xis[b] : 0.0};
              double r = length(xi, d);
              double v = derivative(x, xi) * std::pow(1 + r, expo);
              e.C = std::max(e.C, v);
              if (r >= 1) {
                int s = std::min(static_cast<int>(shell.size()) - 1, static_cast<int>(std::floor(std::log2(r))));
                shell[s] = std::max(shell[s], v);
              }
            }
        }
      double sxl = 0, syl = 0, sxx = 0, sxy = 0;
      int m = 0;
      for (std::size_t s = 0; s < shell.size(); ++s) {
        if (!(shell[s] > 0)) continue;
        double lx = std::log(std::ldexp(1.0, static_cast<int>(s))), ly = std::log(shell[s]);
        sxl += lx, syl += ly, sxx += lx * lx, sxy += lx * ly, ++m;
      }
      if (m >= 2) e.slope = (m * sxy - sxl * syl) / (m * sxx - sxl * sxl);
      e.pass = std::isfinite(e.C) && e.slope <= growth_tol;
      if (!e.pass && tab.in_class) {
        tab.in_class = false;
        tab.first_failure = "alpha=(" + std::to_string(alpha[0]) + "," + std::to_string(alpha[1]) + ") beta=(" +
                            std::to_string(beta[0]) + "," + std::to_string(beta[1]) + ")";
      }
      tab.entries.push_back(e);
    }
  return tab;
}

// ---------------------------------------------------------------------------
// Atomwise boundedness

struct OperatorBoundReport {
  std::vector<double> norms;       ///< ||T a||_{H_loc^(q,p)} per atom
  std::vector<double> domination;  ///< per atom: C in M_loc(Ta) <= C [M chi_Q]^theta / ||chi_Q||_q off 4 sqrt(d) Q
  double sup = 0;
  double median = 0;
  double domination_small = 0;  ///< sup of the constants over side < 1
  double domination_large = 0;  ///< sup over side >= 1
  double theta_small = 0, theta_large = 0;
};

namespace detail {

inline void finish_bound(OperatorBoundReport& rep) {
  if (rep.norms.empty()) return;
  rep.sup = *std::max_element(rep.norms.begin(), rep.norms.end());
  auto sorted = rep.norms;
  std::sort(sorted.begin(), sorted.end());
  rep.median = sorted[sorted.size() / 2];
}

template <class Apply>
OperatorBoundReport atomwise_bound(const std::vector<Atom>& batch, double q, double p, double theta_small,
                                   double theta_large, Apply&& apply) {
  OperatorBoundReport rep;
  rep.theta_small = theta_small;
  rep.theta_large = theta_large;
  MaximalParams prm;
  prm.check_margin = false;  // T a is not compactly supported
  for (const auto& a : batch) {
    ComplexField ta = apply(a.field());
    auto real = exactly_real(ta);
    double norm = 0, dom = 0;
    if (sup_norm(ta) > 0) {
      Field m = real ? smooth_maximal(*real, standard_bump_kernel(a.grid.dim), prm)
                     : smooth_maximal(ta, standard_bump_kernel(a.grid.dim), prm);
      norm = amalgam_norm(m, q, p);
      const bool small = a.cube.side < 1;
      dom = domination_constant(m, a.cube, q, small ? theta_small : theta_large,
                                a.cube.dilate(4 * std::sqrt(double(a.grid.dim))));
      (small ? rep.domination_small : rep.domination_large) =
          std::max(small ? rep.domination_small : rep.domination_large, dom);
    }
    rep.norms.push_back(norm);
    rep.domination.push_back(dom);
  }
  finish_bound(rep);
  return rep;
}

}  // namespace detail

/// ||T a||_{H_loc^(q,p)} over an atom batch and the pointwise domination of
/// M_loc(T a) off 4 sqrt(d) Q with theta = (d + delta + 1)/d. The symbol must
/// classify as S^0.
inline OperatorBoundReport psido_atom_bound(const Symbol& sym, const std::vector<Atom>& batch, double q, double p) {
  OperatorBoundReport empty;
  if (batch.empty()) return empty;
  const GridSpec g = batch.front().grid;
  auto tab = symbol_seminorms(sym, g, 1, 2);
  if (!tab.in_class) throw precondition_error("symbol " + sym.name + " is not S^0: fails at " + tab.first_failure);
  PsidoOperator op(sym, g, false);
  const int delta = batch.front().delta;
  for (const auto& a : batch) require(a.grid == g && a.delta == delta, "atom batch mixes grids or moment orders");
  const double theta = (g.dim + delta + 1.0) / g.dim;
  return detail::atomwise_bound(batch, q, p, theta, theta, [&](const Field& f) { return op(f); });
}

// ---------------------------------------------------------------------------
// Convolution kernels

struct ConvKernelSpec {
  std::string name;
  std::function<double(const Point&)> kernel;
  double A = 1;      ///< |K^| <= A
  double B = 1;      ///< |d^beta K(x)| <= B |x|^{-d-|beta|} up to the order cap
  double C_K = 1;    ///< |K(x)| <= C_K |x|^{-d/q-gamma}
  double gamma = 1;
};

struct ConvKernelReport {
  OperatorBoundReport bound;
  bool weakened = false;  ///< gamma < 1, handled by the weakened-gamma branch
  int order_cap = 0;      ///< floor(d(1/q - 1)) + 1
  double measured_A = 0, measured_B = 0, measured_C_K = 0;
};

/// (1 + |x|^2)^{-s/2} with s = d/q + gamma, with declared constants:
/// A = its integral, C_K = 1, and B = (s + 2)^cap.
inline ConvKernelSpec decay_kernel_spec(int dim, double q, double gamma) {
  const double s = dim / q + gamma;
  const int cap = ExponentConfig::min_delta(dim, q) + 1;
  double A = dim == 1 ? std::sqrt(M_PI) * std::tgamma((s - 1) / 2) / std::tgamma(s / 2) : 2 * M_PI / (s - 2);
  return {"decay", [dim, s](const Point& x) {
            double r = length(x, dim);
            return std::pow(1 + r * r, -s / 2);
          },
          A, std::pow(s + 2, cap), 1.0, gamma};
}

/// Numerically checks the declared kernel constants on the grid, then bounds
/// K * a over the atom batch. Throws precondition_error when gamma is below
/// d(1/q - 1) - floor(d(1/q - 1)) and spec_mismatch with a witness point when
/// a declared constant is violated.
inline ConvKernelReport conv_kernel_experiment(const ConvKernelSpec& spec, const GridSpec& g,
                                               const std::vector<Atom>& batch, double q, double p) {
  require(q > 0 && q <= 1, "convolution experiment needs 0 < q <= 1");
  const int d = g.dim;
  const double excess = d * (1 / q - 1);
  const double frac = excess - std::floor(excess + 1e-12);
  if (!(spec.gamma > frac + 1e-12))
    throw precondition_error("gamma = " + std::to_string(spec.gamma) + " is not above the weakened threshold " +
                             std::to_string(frac));
  ConvKernelReport rep;
  rep.weakened = spec.gamma < 1;
  rep.order_cap = ExponentConfig::min_delta(d, q) + 1;

  const std::size_t N = g.size();
  std::vector<cplx> k(N);
  for (std::size_t c = 0; c < N; ++c) k[c] = spec.kernel(fft::offset(g, c));
  std::vector<cplx> khat = k;
  fft::forward(khat, g);
  for (auto& v : khat) v *= g.cell_volume();

  auto witness = [&](const std::string& what, const Point& z, double lhs, double rhs) {
    std::ostringstream os;
    os << spec.name << ": " << what << " fails at (" << z[0];
    if (d == 2) os << ", " << z[1];
    os << "): " << lhs << " > " << rhs;
    throw spec_mismatch(os.str());
  };
  const double slack = 1 + 1e-9;
  const double reach = g.half_width / 2.0;

  for (std::size_t c = 0; c < N; ++c) {
    double a = std::abs(khat[c]);
    rep.measured_A = std::max(rep.measured_A, a);
    if (a > spec.A * slack) witness("|K^| <= A", fft::frequency(g, c), a, spec.A);
  }
  for (std::size_t c = 0; c < N; ++c) {
    Point z = fft::offset(g, c);
    double r = length(z, d);
    if (r == 0 || r > reach) continue;
    double v = std::abs(k[c]), rhs_exp = d / q + spec.gamma;
    rep.measured_C_K = std::max(rep.measured_C_K, v * std::pow(r, rhs_exp));
    if (v > spec.C_K * std::pow(r, -rhs_exp) * slack) witness("|K| <= C_K |x|^{-d/q-gamma}", z, v, spec.C_K);
  }
  for (const auto& beta : multi_indices(d, rep.order_cap)) {
      const int ord = order(beta);
      if (ord == 0) continue;
      std::vector<cplx> w = khat;
      for (std::size_t c = 0; c < N; ++c) {
        Point xi = fft::frequency(g, c);
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < beta[a]; ++b) w[c] *= cplx{0, 2 * M_PI * xi[a]};
        w[c] /= g.cell_volume();
      }
      fft::inverse(w, g);
      for (std::size_t c = 0; c < N; ++c) {
        Point z = fft::offset(g, c);
        double r = length(z, d);
        if (r == 0 || r > reach) continue;
        double v = std::abs(w[c]);
        rep.measured_B = std::max(rep.measured_B, v * std::pow(r, d + ord));
        if (v > spec.B * std::pow(r, -d - ord) * slack) witness("|d^beta K| <= B |x|^{-d-|beta|}", z, v, spec.B);
      }
    }

  if (batch.empty()) return rep;
  const int delta = ExponentConfig::min_delta(d, q);
  const double theta_small = (d + delta + 1.0) / d;
  const double theta_large = rep.weakened ? (d + delta + spec.gamma) / d : theta_small;
  rep.bound = detail::atomwise_bound(batch, q, p, theta_small, theta_large, [&](const Field& f) {
    require(f.grid() == g, "atom and kernel grids differ");
    auto s = fft::spectrum(f);
    for (std::size_t c = 0; c < N; ++c) s[c] *= khat[c];
    fft::inverse(s, g);
    ComplexField out(g);
    for (std::size_t c = 0; c < N; ++c) out[c] = s[c].real();
    return out;
  });
  return rep;
}

// ---------------------------------------------------------------------------
// Multiplication by a Schwartz function

inline Field schwartz_multiply(const Field& phi, const Field& f) {
  require(phi.grid() == f.grid(), "multiplier and field grids differ");
  Field out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = phi[i] * f[i];
  return out;
}

struct MultiplyReport {
  std::vector<double> ratios;  ///< ||phi f||_{H_loc} / ||f||_{H_loc}
  double sup = 0;
};

inline MultiplyReport schwartz_multiply_bound(const Field& phi, const std::vector<Field>& fields, double q, double p) {
  MultiplyReport rep;
  for (const auto& f : fields) {
    double nf = hqp_norm(f, q, p);
    if (!(nf > 0)) continue;
    rep.ratios.push_back(hqp_norm(schwartz_multiply(phi, f), q, p) / nf);
    rep.sup = std::max(rep.sup, rep.ratios.back());
  }
  return rep;
}

}  // namespace amalgam
