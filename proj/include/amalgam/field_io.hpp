#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>

#include "grid.hpp"

namespace amalgam {

static_assert(std::endian::native == std::endian::little,
              "field files are written in host order, which must be little-endian");

// Binary layout: int64 d, L, M, kind (0 real, 1 complex), then row-major
// float64 values; complex values are interleaved (re, im).

namespace detail {

inline void write_header(std::ofstream& out, const GridSpec& g, std::int64_t kind) {
  std::int64_t head[4] = {g.dim, g.half_width, g.per_unit, kind};
  out.write(reinterpret_cast<const char*>(head), sizeof head);
}

inline GridSpec read_header(std::ifstream& in, std::int64_t& kind, const std::string& path) {
  std::int64_t head[4];
  if (!in.read(reinterpret_cast<char*>(head), sizeof head)) throw usage_error("truncated field header: " + path);
  GridSpec g{static_cast<int>(head[0]), static_cast<int>(head[1]), static_cast<int>(head[2])};
  kind = head[3];
  if (kind != 0 && kind != 1) throw usage_error("unknown field kind in " + path);
  g.validate();
  return g;
}

}  // namespace detail

inline void write_field(const std::string& path, const Field& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw usage_error("cannot write " + path);
  detail::write_header(out, f.grid(), 0);
  out.write(reinterpret_cast<const char*>(f.values().data()),
            static_cast<std::streamsize>(f.size() * sizeof(double)));
}

inline void write_field(const std::string& path, const ComplexField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw usage_error("cannot write " + path);
  detail::write_header(out, f.grid(), 1);
  out.write(reinterpret_cast<const char*>(f.values().data()),
            static_cast<std::streamsize>(f.size() * sizeof(cplx)));
}

/// Reads either kind; real files come back with zero imaginary parts.
inline ComplexField read_field_any(const std::string& path, bool* was_complex = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw usage_error("cannot read " + path);
  std::int64_t kind = 0;
  GridSpec g = detail::read_header(in, kind, path);
  if (was_complex) *was_complex = kind == 1;
  std::vector<cplx> vals(g.size());
  if (kind == 1) {
    in.read(reinterpret_cast<char*>(vals.data()), static_cast<std::streamsize>(vals.size() * sizeof(cplx)));
  } else {
    std::vector<double> re(g.size());
    in.read(reinterpret_cast<char*>(re.data()), static_cast<std::streamsize>(re.size() * sizeof(double)));
    for (std::size_t i = 0; i < re.size(); ++i) vals[i] = re[i];
  }
  if (!in) throw usage_error("truncated field data: " + path);
  return ComplexField(g, std::move(vals));
}

inline Field read_field(const std::string& path) {
  bool was_complex = false;
  auto c = read_field_any(path, &was_complex);
  if (was_complex) throw usage_error("expected a real field: " + path);
  return real_part(c);
}

/// CSV with index columns, coordinate columns and the value (re, im for complex).
template <class T>
void write_field_csv(const std::string& path, const BasicField<T>& f) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw usage_error("cannot write " + path);
  const auto& g = f.grid();
  constexpr bool complex = std::is_same_v<T, cplx>;
  if (g.dim == 1)
    std::fputs(complex ? "i,x,re,im\n" : "i,x,value\n", out);
  else
    std::fputs(complex ? "i,j,x,y,re,im\n" : "i,j,x,y,value\n", out);
  for (std::size_t c = 0; c < f.size(); ++c) {
    auto [i, j] = g.index(c);
    Point x = g.point(c);
    if (g.dim == 1)
      std::fprintf(out, "%d,%.17g", i, x[0]);
    else
      std::fprintf(out, "%d,%d,%.17g,%.17g", i, j, x[0], x[1]);
    if constexpr (complex)
      std::fprintf(out, ",%.17g,%.17g\n", f[c].real(), f[c].imag());
    else
      std::fprintf(out, ",%.17g\n", f[c]);
  }
  std::fclose(out);
}

}  // namespace amalgam
