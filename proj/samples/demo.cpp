// Decomposes a smooth bump into local atoms and compares the coefficient
// functional with the maximal-function quasi-norm.
#include <cstdio>

#include "amalgam/czdecomp.hpp"

using namespace amalgam;

int main() {
  GridSpec g{1, 8, 64};
  Field f = sample(g, [](const Point& x) {
    return bump({(x[0] - 0.5) / 1.5, 0}, 1) - 0.6 * bump({(x[0] + 2.0) / 0.7, 0}, 1);
  });
  const double q = 0.5, p = 0.5, eta = 0.25;
  auto dec = atomic_decompose(f, {q, p, ExponentConfig::min_delta(1, q)});
  Field back = reconstruct(dec);
  back += dec.residual;
  std::printf("||f||_(q,p)            = %.6g\n", amalgam_norm(f, q, p));
  std::printf("||f||_H_loc            = %.6g\n", hqp_norm(f, q, p));
  std::printf("atoms                  = %zu (levels %d..%d)\n", dec.entries.size(), dec.j_min, dec.j_max);
  std::printf("coefficient functional = %.6g\n", coefficient_functional(dec, eta));
  std::printf("round-trip error       = %.3g\n", sup_norm(f - back));
}
