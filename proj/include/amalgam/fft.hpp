#pragma once

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "grid.hpp"

namespace amalgam::fft {

namespace detail {

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int dim, int n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(dim, n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::size_t total = dim == 1 ? n : static_cast<std::size_t>(n) * n;
    auto* buf = fftw_alloc_complex(total);
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan p = dim == 1 ? fftw_plan_dft_1d(n, buf, buf, sign, flags)
                           : fftw_plan_dft_2d(n, n, buf, buf, sign, flags);
    fftw_free(buf);
    plans_.emplace(key, p);
    return p;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

inline PlanCache& cache() {
  static PlanCache c;
  return c;
}

}  // namespace detail

/// In-place unnormalized DFT, sum_j v_j e^{-2 pi i jk/n}.
inline void forward(std::vector<cplx>& v, const GridSpec& g) {
  auto* p = reinterpret_cast<fftw_complex*>(v.data());
  fftw_execute_dft(detail::cache().get(g.dim, g.n(), FFTW_FORWARD), p, p);
}

/// In-place inverse DFT including the 1/n^d factor.
inline void inverse(std::vector<cplx>& v, const GridSpec& g) {
  auto* p = reinterpret_cast<fftw_complex*>(v.data());
  fftw_execute_dft(detail::cache().get(g.dim, g.n(), FFTW_BACKWARD), p, p);
  double s = 1.0 / static_cast<double>(v.size());
  for (auto& x : v) x *= s;
}

/// Signed wavenumber of DFT index k (range [-n/2, n/2)).
inline int signed_index(int k, int n) { return k < n / 2 ? k : k - n; }

/// Torus frequency xi = k'/(2L) of a DFT index.
inline Point frequency(const GridSpec& g, std::size_t flat) {
  auto [k0, k1] = g.index(flat);
  double s = 1.0 / (2.0 * g.half_width);
  return {signed_index(k0, g.n()) * s, g.dim == 2 ? signed_index(k1, g.n()) * s : 0.0};
}

/// Minimal-image offset z = (signed index) * h of a torus position.
inline Point offset(const GridSpec& g, std::size_t flat) {
  auto [i0, i1] = g.index(flat);
  return {signed_index(i0, g.n()) * g.h(), g.dim == 2 ? signed_index(i1, g.n()) * g.h() : 0.0};
}

template <class T>
std::vector<cplx> spectrum(const BasicField<T>& f) {
  std::vector<cplx> v(f.values().begin(), f.values().end());
  forward(v, f.grid());
  return v;
}

}  // namespace amalgam::fft
