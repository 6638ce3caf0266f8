#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <mutex>
#include <numeric>
#include <vector>

#include "amalgam.hpp"
#include "convolve.hpp"

namespace amalgam {

// ---------------------------------------------------------------------------
// Hardy-Littlewood maximal function

namespace detail {

/// Exact sup over all radii for the piecewise-constant interpolant: the ball
/// average is monotone between radii where x +- r crosses a cell boundary.
inline Field hl_maximal_1d(const Field& a) {
  const auto& g = a.grid();
  const int n = g.n();
  std::vector<double> prefix(n + 1, 0.0);
  for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + a[i];
  Field out(g);
  for (int i = 0; i < n; ++i) {
    double best = a[i];
    for (int k = 1; k <= n; ++k) {
      int lo = std::max(i - k, 0), hi = std::min(i + k + 1, n);
      double avg = (prefix[hi] - prefix[lo]) / (2 * k + 1);
      best = std::max(best, avg);
      if (lo == 0 && hi == n) break;
    }
    out[i] = best;
  }
  return out;
}

/// Disk averages by zero-padded FFT on a quarter-octave radius grid.
inline Field hl_maximal_2d(const Field& a) {
  const auto& g = a.grid();
  const int n = g.n();
  GridSpec pad{2, 3 * g.half_width, g.per_unit};
  const int np = pad.n();
  std::vector<cplx> fs(pad.size(), cplx{});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) fs[pad.flat(i, j)] = a[g.flat(i, j)];
  fft::forward(fs, pad);

  Field out(g);
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = a[c];
  const double rmax = n * std::sqrt(2.0);  // in cells
  std::vector<cplx> ks(pad.size()), w(pad.size());
  constexpr int sub = 8;
  for (int k = 0;; ++k) {
    double r = std::pow(2.0, k / 4.0);  // in cells
    if (r > rmax * 1.2) break;
    std::fill(ks.begin(), ks.end(), cplx{});
    double area = 0;
    int reach = static_cast<int>(std::ceil(r + 1));
    for (int di = -reach; di <= reach; ++di)
      for (int dj = -reach; dj <= reach; ++dj) {
        double near0 = std::max(0.0, std::abs(di) - 0.5), near1 = std::max(0.0, std::abs(dj) - 0.5);
        double far0 = std::abs(di) + 0.5, far1 = std::abs(dj) + 0.5;
        double frac;
        if (std::hypot(far0, far1) <= r)
          frac = 1.0;
        else if (std::hypot(near0, near1) >= r)
          frac = 0.0;
        else {
          int hits = 0;
          for (int u = 0; u < sub; ++u)
            for (int v = 0; v < sub; ++v) {
              double x = di - 0.5 + (u + 0.5) / sub, y = dj - 0.5 + (v + 0.5) / sub;
              if (x * x + y * y < r * r) ++hits;
            }
          frac = hits / double(sub * sub);
        }
        area += frac;
        if (frac > 0) ks[pad.flat((di + np) % np, (dj + np) % np)] = frac;
      }
    fft::forward(ks, pad);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = fs[i] * ks[i];
    fft::inverse(w, pad);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double avg = w[pad.flat(i, j)].real() / area;
        auto& o = out[g.flat(i, j)];
        o = std::max(o, avg);
      }
  }
  return out;
}

}  // namespace detail

/// Centered Hardy-Littlewood maximal function of |f| (f extended by zero).
template <class T>
Field hl_maximal(const BasicField<T>& f) {
  Field a = abs(f);
  return a.grid().dim == 1 ? detail::hl_maximal_1d(a) : detail::hl_maximal_2d(a);
}

struct VectorMaximalReport {
  double lhs = 0;  ///< ||(sum (M f_n)^u)^{1/u}||_{q,p}
  double rhs = 0;  ///< ||(sum |f_n|^u)^{1/u}||_{q,p}
  double ratio = 0;
};

template <class T>
VectorMaximalReport fs_vector_maximal_check(const std::vector<BasicField<T>>& fs, double u,
                                            double q, double p) {
  require(u > 1 && q > 1 && p > 1, "vector-valued maximal bound needs u, q, p > 1");
  VectorMaximalReport r;
  if (fs.empty()) return r;
  Field sm(fs.front().grid()), sf(fs.front().grid());
  for (const auto& f : fs) {
    Field m = hl_maximal(f);
    for (std::size_t i = 0; i < f.size(); ++i) {
      sm[i] += std::pow(m[i], u);
      sf[i] += std::pow(modulus(f[i]), u);
    }
  }
  for (std::size_t i = 0; i < sm.size(); ++i) {
    sm[i] = std::pow(sm[i], 1 / u);
    sf[i] = std::pow(sf[i], 1 / u);
  }
  r.lhs = amalgam_norm(sm, q, p);
  r.rhs = amalgam_norm(sf, q, p);
  r.ratio = r.rhs > 0 ? r.lhs / r.rhs : 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Test family F_N

namespace detail {

struct DerivativeTable {
  std::vector<Point> nodes;
  double weight = 0;                      // midpoint cell volume
  std::vector<std::vector<double>> ders;  // per node, graded up to order k
};

inline const DerivativeTable& derivative_table(int dim, int k) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, DerivativeTable> cache;
  std::lock_guard lock(mutex);
  auto key = std::make_pair(dim, k);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  DerivativeTable t;
  const int m = dim == 1 ? 8000 : 240;
  const double step = 2.0 / m;
  t.weight = dim == 1 ? step : step * step;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < (dim == 1 ? 1 : m); ++j) {
      Point y{-1 + (i + 0.5) * step, dim == 2 ? -1 + (j + 0.5) * step : 0.0};
      if (length(y, dim) >= 1) continue;
      t.nodes.push_back(y);
      t.ders.push_back(bump_derivatives(y, dim, k));
    }
  return cache.emplace(key, std::move(t)).first->second;
}

}  // namespace detail

/// N_N of x -> s^{-d-|alpha|} (d^alpha phi)((x - shift)/s): the integral of
/// (1+|x|)^N times the sum of |d^beta| over |beta| <= N+1.
inline double weighted_derivative_norm(const MultiIndex& alpha, double scale, const Point& shift,
                                       int N, int dim) {
  const int k = order(alpha) + N + 1;
  const auto& t = detail::derivative_table(dim, k);
  auto betas = multi_indices(dim, N + 1);
  std::vector<int> pos(betas.size());
  std::vector<double> fac(betas.size());
  for (std::size_t b = 0; b < betas.size(); ++b) {
    MultiIndex g{alpha[0] + betas[b][0], alpha[1] + betas[b][1]};
    pos[b] = multi_position(dim, g);
    fac[b] = std::pow(scale, -(order(alpha) + order(betas[b])));
  }
  double total = 0;
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    const auto& y = t.nodes[i];
    Point x{shift[0] + scale * y[0], shift[1] + scale * y[1]};
    double w = std::pow(1 + length(x, dim), N);
    double s = 0;
    for (std::size_t b = 0; b < pos.size(); ++b) s += fac[b] * std::abs(t.ders[i][pos[b]]);
    total += w * s;
  }
  return total * t.weight;
}

struct TestFamily {
  struct Member {
    MultiIndex alpha{};
    double scale = 1;
    Point shift{};
    double raw_norm = 1;  ///< N_N before normalization
    Kernel kernel;
  };
  int dim = 1;
  int order = 0;
  std::vector<Member> members;

  std::vector<Kernel> kernels() const {
    std::vector<Kernel> out;
    for (const auto& m : members) out.push_back(m.kernel);
    return out;
  }
};

/// Derivatives of the bump of orders 0..N, dilated by {1, 1/2} and shifted by
/// {0, +-1/4} along each axis, keeping supports in the unit ball; each member
/// is divided by its N_N.
inline TestFamily standard_test_family(int dim, int N) {
  require(N >= 0, "test family order must be nonnegative");
  TestFamily fam{dim, N, {}};
  std::vector<std::pair<double, Point>> placements{{1.0, {0, 0}}, {0.5, {0, 0}}};
  for (int a = 0; a < dim; ++a)
    for (double sgn : {1.0, -1.0}) {
      Point s{0, 0};
      s[a] = 0.25 * sgn;
      placements.push_back({0.5, s});
    }
  for (const auto& [scale, shift] : placements)
    for (const auto& alpha : multi_indices(dim, N)) {
      TestFamily::Member m;
      m.alpha = alpha;
      m.scale = scale;
      m.shift = shift;
      m.raw_norm = weighted_derivative_norm(alpha, scale, shift, N, dim);
      const double amp = std::pow(scale, -(dim + order(alpha))) / m.raw_norm;
      m.kernel.name = "family";
      m.kernel.spatial = [=](const Point& x) {
        Point y{(x[0] - shift[0]) / scale, (x[1] - shift[1]) / scale};
        if (length(y, dim) >= 1) return 0.0;
        return amp * bump_derivative(y, dim, alpha);
      };
      m.kernel.mass = order(alpha) == 0 ? 1.0 / m.raw_norm : 0.0;
      m.kernel.radius = length(shift, dim) + scale;
      fam.members.push_back(std::move(m));
    }
  return fam;
}

// ---------------------------------------------------------------------------
// Smooth maximal functions

enum class Scope { global, local };
enum class Variant { radial, nontangential, auxiliary };

struct MaximalParams {
  Scope scope = Scope::local;
  Variant variant = Variant::radial;
  double aperture = 1.0;       ///< a, nontangential cone aperture
  double decay = 0.0;          ///< b, auxiliary decay exponent
  int up_octaves = -1;         ///< J_up for global scope; negative: floor(log2(L/2))
  int steps_per_octave = 1;
  bool check_margin = true;
};

/// The dilation set T: 2^{-j} down to 4h, plus 2^{+j} for global scope.
inline std::vector<double> dilations(const GridSpec& g, const MaximalParams& prm) {
  require(prm.steps_per_octave >= 1, "steps per octave must be positive");
  const double tmin = min_dilation(g);
  const int J = static_cast<int>(std::ceil(std::log2(1.0 / tmin) - 1e-12));
  std::vector<double> ts;
  for (int j = J * prm.steps_per_octave; j >= 0; --j) {
    double t = std::pow(2.0, -static_cast<double>(j) / prm.steps_per_octave);
    if (t >= tmin * (1 - 1e-12)) ts.push_back(t);
  }
  if (prm.scope == Scope::global) {
    int up = prm.up_octaves >= 0 ? prm.up_octaves
                                 : std::max(0, static_cast<int>(std::floor(std::log2(g.half_width / 2.0))));
    for (int j = 1; j <= up * prm.steps_per_octave; ++j)
      ts.push_back(std::pow(2.0, static_cast<double>(j) / prm.steps_per_octave));
  }
  if (ts.empty()) throw under_resolved("no dilation in T is at least 4h");
  return ts;
}

namespace detail {

/// Periodic sliding max over |i - j| <= w along one axis of a line.
inline void sliding_max_line(const double* in, double* out, int n, int w, std::size_t stride) {
  if (w <= 0) {
    for (int i = 0; i < n; ++i) out[i * stride] = in[i * stride];
    return;
  }
  if (2 * w + 1 >= n) {
    double m = 0;
    for (int i = 0; i < n; ++i) m = std::max(m, in[i * stride]);
    for (int i = 0; i < n; ++i) out[i * stride] = m;
    return;
  }
  std::deque<int> dq;  // indices into the unrolled sequence k - w .. n - 1 + w
  auto val = [&](int k) { return in[static_cast<std::size_t>(((k % n) + n) % n) * stride]; };
  for (int k = -w; k < n + w; ++k) {
    while (!dq.empty() && val(dq.back()) <= val(k)) dq.pop_back();
    dq.push_back(k);
    int i = k - w;  // window [i - w, i + w] is complete
    if (i >= 0) {
      while (dq.front() < i - w) dq.pop_front();
      out[static_cast<std::size_t>(i) * stride] = val(dq.front());
    }
  }
}

/// sup over |y - x| <= radius of g(y), torus, radius in cells.
inline Field ball_max(const Field& g, double radius) {
  const auto& gs = g.grid();
  const int n = gs.n();
  const int w = static_cast<int>(std::floor(radius + 1e-9));
  Field out(gs);
  if (gs.dim == 1) {
    detail::sliding_max_line(g.values().data(), out.values().data(), n, w, 1);
    return out;
  }
  // rows of half-width hw(dy) = floor(sqrt(r^2 - dy^2))
  std::map<int, Field> row_max;
  for (int dy = 0; dy <= w; ++dy) {
    int hw = static_cast<int>(std::floor(std::sqrt(std::max(0.0, radius * radius - dy * dy)) + 1e-9));
    if (row_max.count(hw)) continue;
    Field rm(gs);
    for (int i = 0; i < n; ++i)
      sliding_max_line(g.values().data() + static_cast<std::size_t>(i) * n,
                       rm.values().data() + static_cast<std::size_t>(i) * n, n, hw, 1);
    row_max.emplace(hw, std::move(rm));
  }
  for (int dy = -w; dy <= w; ++dy) {
    int hw = static_cast<int>(std::floor(std::sqrt(std::max(0.0, radius * radius - dy * dy)) + 1e-9));
    const Field& rm = row_max.at(hw);
    for (int i = 0; i < n; ++i) {
      int src = ((i + dy) % n + n) % n;
      for (int j = 0; j < n; ++j) {
        double v = rm[gs.flat(src, j)];
        double& o = out[gs.flat(i, j)];
        o = std::max(o, v);
      }
    }
  }
  return out;
}

/// sup over offsets y with |y| <= R of g(x - y) (1 + |y|/t)^{-b}, torus.
inline Field weighted_offset_max(const Field& g, double t, double b, double R) {
  const auto& gs = g.grid();
  const int n = gs.n();
  const double h = gs.h();
  const int w = std::min(static_cast<int>(std::floor(R / h + 1e-9)), n / 2);
  Field out(gs);
  if (gs.dim == 1) {
    for (int dy = -w; dy <= w; ++dy) {
      double wt = std::pow(1 + std::abs(dy) * h / t, -b);
      for (int i = 0; i < n; ++i) {
        double v = g[((i - dy) % n + n) % n] * wt;
        out[i] = std::max(out[i], v);
      }
    }
    return out;
  }
  for (int d0 = -w; d0 <= w; ++d0)
    for (int d1 = -w; d1 <= w; ++d1) {
      double r = std::hypot(d0, d1) * h;
      if (r > R + 1e-12) continue;
      double wt = std::pow(1 + r / t, -b);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double v = g[gs.flat(((i - d0) % n + n) % n, ((j - d1) % n + n) % n)] * wt;
          double& o = out[gs.flat(i, j)];
          o = std::max(o, v);
        }
    }
  return out;
}

}  // namespace detail

/// Pointwise maximal function of f over the given kernel family and dilation set.
template <class T>
Field smooth_maximal(const BasicField<T>& f, const std::vector<Kernel>& kernels,
                     const MaximalParams& prm) {
  const auto& g = f.grid();
  require(!kernels.empty(), "smooth maximal needs at least one kernel");
  if (prm.variant == Variant::nontangential) require(prm.aperture > 0, "aperture must be positive");
  if (prm.variant == Variant::auxiliary) require(prm.decay > 0, "auxiliary decay b must be positive");
  auto ts = dilations(g, prm);
  Convolver<T> conv(f, {prm.check_margin});
  Field out(g);
  for (const auto& k : kernels)
    for (double t : ts) {
      Field a = abs(conv(k, t));
      if (prm.variant == Variant::nontangential) {
        a = detail::ball_max(a, prm.aperture * t / g.h());
      } else if (prm.variant == Variant::auxiliary) {
        double R = t * (std::pow(1e6, 1.0 / prm.decay) - 1.0);
        a = detail::weighted_offset_max(a, t, prm.decay, std::min(R, static_cast<double>(g.half_width)));
      }
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], a[i]);
    }
  return out;
}

template <class T>
Field smooth_maximal(const BasicField<T>& f, const Kernel& k, const MaximalParams& prm) {
  return smooth_maximal(f, std::vector<Kernel>{k}, prm);
}

/// Radial local maximal function with the standard mollifier.
template <class T>
Field local_radial_maximal(const BasicField<T>& f, bool check_margin = true) {
  MaximalParams prm;
  prm.check_margin = check_margin;
  return smooth_maximal(f, standard_bump_kernel(f.grid().dim), prm);
}

/// ||M f||_{q,p} for the given maximal operator; the standard mollifier by default.
template <class T>
double hqp_norm(const BasicField<T>& f, double q, double p, const MaximalParams& prm = {}) {
  return amalgam_norm(smooth_maximal(f, standard_bump_kernel(f.grid().dim), prm), q, p);
}

template <class T>
double hqp_norm(const BasicField<T>& f, double q, double p, const std::vector<Kernel>& kernels,
                const MaximalParams& prm) {
  return amalgam_norm(smooth_maximal(f, kernels, prm), q, p);
}

struct EquivalenceNorms {
  double grand_radial = 0;         ///< ||M^0_{F_N} f||
  double grand_nontangential = 0;  ///< ||M_{F_N} f||
  double radial = 0;               ///< ||M_phi f||
};

struct EquivalenceReport {
  EquivalenceNorms global, local;
  /// Ratios among the three norms: grand_nt / grand_radial, radial / grand_radial,
  /// radial / grand_nt, global then local.
  std::vector<double> ratios() const {
    auto r = [](double a, double b) { return b > 0 ? a / b : 0.0; };
    std::vector<double> out;
    for (const auto* s : {&global, &local}) {
      out.push_back(r(s->grand_nontangential, s->grand_radial));
      out.push_back(r(s->radial, s->grand_radial));
      out.push_back(r(s->radial, s->grand_nontangential));
    }
    return out;
  }
};

template <class T>
EquivalenceReport equivalence_report(const BasicField<T>& f, double q, double p,
                                     const TestFamily& fam, bool check_margin = true) {
  EquivalenceReport rep;
  auto fk = fam.kernels();
  auto phi = standard_bump_kernel(f.grid().dim);
  for (Scope s : {Scope::global, Scope::local}) {
    auto& out = s == Scope::global ? rep.global : rep.local;
    MaximalParams rad{s, Variant::radial};
    rad.check_margin = check_margin;
    MaximalParams nt{s, Variant::nontangential, 1.0};
    nt.check_margin = check_margin;
    out.grand_radial = hqp_norm(f, q, p, fk, rad);
    out.grand_nontangential = hqp_norm(f, q, p, fk, nt);
    out.radial = hqp_norm(f, q, p, {phi}, rad);
  }
  return rep;
}

}  // namespace amalgam
