#include "decomposition_io.hpp"

#include <cstdio>
#include <fstream>
#include <limits>

#include "amalgam/field_io.hpp"

namespace amalgam::lab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json num(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

double num_of(const json& j) {
  if (!j.is_string()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  return s == "-inf" ? -inf : inf;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw usage_error("cannot open " + p.string());
  return json::parse(in);
}

}  // namespace

json cube_json(const Cube& q) {
  return {{"corner", q.dim == 1 ? json::array({q.corner[0]}) : json::array({q.corner[0], q.corner[1]})},
          {"side", q.side}};
}

Cube cube_from_json(const json& j, int dim) {
  Cube q{dim, {0, 0}, j.at("side").get<double>()};
  for (int a = 0; a < dim; ++a) q.corner[a] = j.at("corner").at(a).get<double>();
  return q;
}

void write_atom(const Atom& a, const fs::path& stem) {
  write_field(stem.string() + ".bin", a.profile.to_field(a.grid));
  auto v = validate_atom(a);
  json j{{"cube", cube_json(a.cube)},
         {"scale", num(a.scale)},
         {"q", a.q},
         {"r", num(a.r)},
         {"delta", a.delta},
         {"local", a.local},
         {"verdicts",
          {{"valid", v.valid()},
           {"support", v.support_ok},
           {"size", v.size_ok},
           {"moments_required", v.moments_required},
           {"moments", v.moments_ok},
           {"size_ratio", num(v.size_ratio)},
           {"worst_moment", num(v.worst_moment)},
           {"violation", v.violation}}}};
  std::ofstream(stem.string() + ".json") << j.dump(2) << '\n';
}

Atom read_atom(const fs::path& stem) {
  Field prof = read_field(stem.string() + ".bin");
  json j = read_json(stem.string() + ".json");
  Atom a;
  a.grid = prof.grid();
  a.cube = cube_from_json(j.at("cube"), a.grid.dim);
  for (std::size_t c = 0; c < prof.size(); ++c)
    if (prof[c] != 0) a.profile.push(c, prof[c]);
  a.scale = num_of(j.at("scale"));
  a.q = j.at("q").get<double>();
  a.r = num_of(j.at("r"));
  a.delta = j.at("delta").get<int>();
  a.local = j.at("local").get<bool>();
  return a;
}

void write_decomposition(const AtomicDecomposition& dec, const fs::path& dir) {
  fs::create_directories(dir);
  const auto& g = dec.grid;
  const auto& c = dec.config;
  json m;
  m["grid"] = {{"dim", g.dim}, {"L", g.half_width}, {"M", g.per_unit}, {"margin", g.margin}};
  m["config"] = {{"q", c.q},
                 {"p", c.p},
                 {"delta", c.delta},
                 {"truncation", c.truncation},
                 {"max_levels", c.max_levels},
                 {"check_margin", c.check_margin},
                 {"aperture", c.aperture}};
  m["constants"] = {{"j_min", dec.j_min},
                    {"j_max", dec.j_max},
                    {"C0", num(dec.C0)},
                    {"C1", num(dec.C1)},
                    {"diam_ratio", num(dec.diam_ratio)},
                    {"worst_condition", num(dec.worst_condition)},
                    {"nonzero_disjoint_corrections", dec.nonzero_disjoint_corrections},
                    {"roundoff_pieces", dec.roundoff_pieces},
                    {"max_moment_fix", num(dec.max_moment_fix)}};
  json levels = json::array();
  for (const auto& s : dec.levels)
    levels.push_back({{"j", s.j},
                      {"mask_cells", s.mask_cells},
                      {"cubes", s.cubes},
                      {"boundary_cells", s.boundary_cells},
                      {"max_overlap", s.max_overlap},
                      {"support_overlap", s.support_overlap},
                      {"max_c_eta_ratio", num(s.max_c_eta_ratio)}});
  m["levels"] = levels;
  json entries = json::array();
  for (std::size_t n = 0; n < dec.entries.size(); ++n) {
    const auto& e = dec.entries[n];
    char name[32];
    std::snprintf(name, sizeof name, "atom_%05zu", n);
    write_atom(e.atom, dir / name);
    entries.push_back({{"lambda", e.lambda}, {"j", e.j}, {"k", e.k}, {"cube", cube_json(e.atom.cube)}, {"atom", name}});
  }
  m["entries"] = entries;
  m["residual"] = "residual.bin";
  write_field((dir / "residual.bin").string(), dec.residual);
  std::ofstream(dir / "manifest.json") << m.dump(2) << '\n';
}

AtomicDecomposition read_decomposition(const fs::path& dir) {
  json m = read_json(dir / "manifest.json");
  AtomicDecomposition dec;
  const auto& gj = m.at("grid");
  dec.grid = GridSpec{gj.at("dim").get<int>(), gj.at("L").get<int>(), gj.at("M").get<int>(), gj.at("margin").get<int>()};
  const auto& c = m.at("config");
  dec.config = {c.at("q").get<double>(),        c.at("p").get<double>(),        c.at("delta").get<int>(),
                c.at("truncation").get<double>(), c.at("max_levels").get<int>(), c.at("check_margin").get<bool>(),
                c.at("aperture").get<double>()};
  const auto& k = m.at("constants");
  dec.j_min = k.at("j_min");
  dec.j_max = k.at("j_max");
  dec.C0 = num_of(k.at("C0"));
  dec.C1 = num_of(k.at("C1"));
  dec.diam_ratio = num_of(k.at("diam_ratio"));
  dec.worst_condition = num_of(k.at("worst_condition"));
  dec.nonzero_disjoint_corrections = k.at("nonzero_disjoint_corrections");
  dec.roundoff_pieces = k.at("roundoff_pieces");
  dec.max_moment_fix = num_of(k.at("max_moment_fix"));
  for (const auto& s : m.at("levels"))
    dec.levels.push_back({s.at("j"), s.at("mask_cells"), s.at("cubes"), s.at("boundary_cells"), s.at("max_overlap"),
                          s.at("support_overlap"), num_of(s.at("max_c_eta_ratio"))});
  for (const auto& e : m.at("entries")) {
    DecompositionEntry en;
    en.lambda = e.at("lambda");
    en.j = e.at("j");
    en.k = e.at("k");
    en.atom = read_atom(dir / e.at("atom").get<std::string>());
    if (!(en.atom.grid == dec.grid)) throw usage_error("atom grid differs from the manifest grid");
    dec.entries.push_back(std::move(en));
  }
  dec.residual = read_field((dir / m.at("residual").get<std::string>()).string());
  return dec;
}

}  // namespace amalgam::lab
