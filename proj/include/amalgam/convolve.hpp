#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fft.hpp"
#include "mollifier.hpp"

namespace amalgam {

/// A unit-scale convolution kernel, given in space or in frequency.
struct Kernel {
  std::string name;
  std::function<double(const Point&)> spatial;  ///< used when set
  std::function<double(const Point&)> spectral;  ///< real, even Fourier transform otherwise
  double mass = 1.0;    ///< integral; pinned on the zero mode of spatial kernels
  double radius = 1.0;  ///< spatial support radius

  bool is_spatial() const { return static_cast<bool>(spatial); }
};

inline Kernel standard_bump_kernel(int dim) {
  return {"bump", [dim](const Point& x) { return bump(x, dim); }, {}, 1.0, 1.0};
}

/// Smooth radial step: 1 for r <= a, 0 for r >= b, C-infinity in between.
inline double smooth_step_down(double r, double a, double b) {
  if (r <= a) return 1.0;
  if (r >= b) return 0.0;
  double s = (r - a) / (b - a);
  double e0 = std::exp(-1.0 / (1.0 - s));
  double e1 = std::exp(-1.0 / s);
  return e0 / (e0 + e1);
}

/// Kernel whose Fourier transform is 1 on |xi| <= 1/2 and vanishes for |xi| >= 1.
inline Kernel frequency_bump_kernel(int dim) {
  return {"frequency-bump", {},
          [dim](const Point& xi) { return smooth_step_down(length(xi, dim), 0.5, 1.0); }, 1.0, inf};
}

/// DFT multiplier of phi_t on the grid, ready to multiply the DFT of a field.
inline std::vector<cplx> kernel_spectrum(const Kernel& k, const GridSpec& g, double t) {
  std::vector<cplx> s(g.size(), cplx{});
  if (k.is_spatial()) {
    const double inv_td = 1.0 / std::pow(t, g.dim);
    const double reach = k.radius * t;
    for (std::size_t c = 0; c < s.size(); ++c) {
      Point z = fft::offset(g, c);
      if (length(z, g.dim) >= reach) continue;
      s[c] = k.spatial({z[0] / t, z[1] / t}) * inv_td;
    }
    fft::forward(s, g);
    const double vol = g.cell_volume();
    // renormalize so the zero mode carries the declared mass exactly
    const double sum = s[0].real() * vol;
    const double scale = (k.mass != 0 && sum != 0) ? vol * k.mass / sum : vol;
    for (auto& v : s) v *= scale;
    s[0] = k.mass;
  } else {
    for (std::size_t c = 0; c < s.size(); ++c) {
      Point xi = fft::frequency(g, c);
      s[c] = k.spectral({t * xi[0], t * xi[1]});
    }
  }
  return s;
}

struct ConvolveOptions {
  bool check_margin = true;  ///< reject fields reaching into the boundary band
};

inline double min_dilation(const GridSpec& g) { return 4.0 * g.h(); }

/// Caches the DFT of one field for repeated dilated convolutions on the torus.
template <class T>
class Convolver {
 public:
  explicit Convolver(const BasicField<T>& f, ConvolveOptions opt = {}) : grid_(f.grid()) {
    if (opt.check_margin && margin_sup(f) > 0)
      throw wrap_risk("field support reaches the " + std::to_string(grid_.margin_cells()) +
                      "-cell boundary margin");
    spec_ = fft::spectrum(f);
  }

  const GridSpec& grid() const { return grid_; }

  BasicField<T> operator()(const Kernel& k, double t) const {
    return apply(kernel_spectrum(k, grid_, t), t);
  }

  BasicField<T> apply(const std::vector<cplx>& multiplier, double t) const {
    if (t < min_dilation(grid_) * (1 - 1e-12))
      throw under_resolved("dilation t = " + std::to_string(t) + " is below 4h");
    std::vector<cplx> w(spec_.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = spec_[i] * multiplier[i];
    fft::inverse(w, grid_);
    BasicField<T> out(grid_);
    for (std::size_t i = 0; i < w.size(); ++i) {
      if constexpr (std::is_same_v<T, cplx>)
        out[i] = w[i];
      else
        out[i] = w[i].real();
    }
    return out;
  }

 private:
  GridSpec grid_;
  std::vector<cplx> spec_;
};

/// Periodized f * phi_t with phi_t(x) = t^{-d} phi(x/t).
template <class T>
BasicField<T> convolve_dilated(const BasicField<T>& f, const Kernel& k, double t,
                               ConvolveOptions opt = {}) {
  return Convolver<T>(f, opt)(k, t);
}

}  // namespace amalgam
