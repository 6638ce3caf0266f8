#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "amalgam/dual.hpp"
#include "amalgam/field_io.hpp"
#include "amalgam/psido.hpp"
#include "config.hpp"
#include "corpus.hpp"
#include "decomposition_io.hpp"
#include "suites.hpp"

using namespace amalgam;
using namespace amalgam::lab;

namespace {

struct Overrides {
  std::string config, fixtures, out;
  bool record = false;
  std::optional<std::uint64_t> seed;
  std::optional<double> q, p, r, eta;
  std::optional<int> delta, dim, L, M;
};

void add_overrides(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON experiment config");
  app->add_flag("--record-fixtures", o.record, "measure and store fixture bands");
  app->add_option("--fixtures", o.fixtures, "fixture file");
  app->add_option("--out", o.out, "output directory (suites) or file (verbs)");
  app->add_option("--seed", o.seed);
  app->add_option("--q", o.q);
  app->add_option("--p", o.p);
  app->add_option("--r", o.r);
  app->add_option("--delta", o.delta);
  app->add_option("--eta", o.eta);
  app->add_option("--dim", o.dim);
  app->add_option("--L", o.L);
  app->add_option("--M", o.M);
}

ExperimentConfig make_config(const std::string& suite, const Overrides& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  cfg.suite = suite;
  if (!o.fixtures.empty()) cfg.fixtures = o.fixtures;
  if (!o.out.empty()) cfg.out = o.out;
  cfg.record = cfg.record || o.record;
  if (o.seed) cfg.seed = *o.seed;
  if (o.dim) cfg.grid.dim = *o.dim;
  if (o.L) cfg.grid.half_width = *o.L;
  if (o.M) cfg.grid.per_unit = *o.M;
  if (o.q || o.p || o.r || o.delta || o.eta) {
    ExponentConfig e = cfg.exponents.value_or(ExponentConfig{});
    if (o.q) e.q = *o.q;
    if (o.p) e.p = *o.p;
    if (o.r) e.r = *o.r;
    if (o.delta) e.delta = *o.delta;
    if (o.eta) e.eta = *o.eta;
    cfg.exponents = e;
  }
  return cfg;
}

ExponentConfig exponents(const Overrides& o, int dim) {
  ExponentConfig e;
  if (o.q) e.q = *o.q;
  if (o.p) e.p = *o.p;
  if (o.r) e.r = *o.r;
  if (o.delta) e.delta = *o.delta;
  if (o.eta) e.eta = *o.eta;
  return e.resolved(dim);
}

void emit(const json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::ofstream(path) << j.dump(2) << '\n';
  }
}

json cube_or_null(const Cube& c, bool set) { return set ? cube_json(c) : json(nullptr); }

Symbol load_symbol(const std::string& path, const GridSpec& g) {
  json j;
  if (path.empty()) {
    j = {{"template", "bessel"}};
  } else if (path.front() == '{') {
    j = json::parse(path, nullptr, false);
    if (j.is_discarded()) throw usage_error("symbol: inline JSON does not parse");
  } else {
    std::ifstream in(path);
    if (!in) throw usage_error("symbol: cannot open " + path);
    j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw usage_error("symbol: " + path + " does not parse");
  }
  if (!j.contains("template")) throw usage_error("symbol.template: missing");
  const auto name = j["template"].get<std::string>();
  const int d = j.value("dim", g.dim);
  if (d != g.dim) throw usage_error("symbol.dim: differs from the field dimension");
  const double L = j.value("L", double(g.half_width));
  if (name == "identity") return identity_symbol(d);
  if (name == "bessel") return bessel_symbol(d, L);
  if (name == "riesz") return riesz_symbol(d, j.value("cutoff", 1.0 / 64));
  if (name == "variable") return variable_symbol(d, L);
  if (name == "order_one") return order_one_symbol(d);
  if (name == "oscillating") return oscillating_symbol(d);
  throw usage_error("symbol.template: unknown template '" + name + "'");
}

int run_norm(const std::string& input, const Overrides& o) {
  Field f = read_field(input);
  auto e = exponents(o, f.grid().dim);
  emit({{"input", input},
        {"q", e.q},
        {"p", e.p},
        {"amalgam_norm", amalgam_norm(f, e.q, e.p)},
        {"lq_norm", lq_norm(f, e.q)},
        {"sup_norm", sup_norm(f)}},
       o.out);
  return 0;
}

int run_maximal(const std::string& input, const std::string& variant, const std::string& scope,
                const std::string& csv, const Overrides& o) {
  Field f = read_field(input);
  auto e = exponents(o, f.grid().dim);
  Field m;
  if (variant == "hl") {
    m = hl_maximal(f);
  } else {
    MaximalParams prm;
    if (scope == "global") prm.scope = Scope::global;
    else if (scope != "local") throw usage_error("scope: expected local or global");
    if (variant == "nontangential") prm.variant = Variant::nontangential;
    else if (variant == "auxiliary") prm.variant = Variant::auxiliary, prm.decay = 2.0 * f.grid().dim / e.q;
    else if (variant != "radial") throw usage_error("variant: expected hl, radial, nontangential or auxiliary");
    m = smooth_maximal(f, standard_bump_kernel(f.grid().dim), prm);
  }
  if (!csv.empty()) write_field_csv(csv, m);
  emit({{"input", input}, {"variant", variant}, {"scope", scope}, {"q", e.q}, {"p", e.p},
        {"norm", amalgam_norm(m, e.q, e.p)}, {"sup", sup_norm(m)}},
       o.out);
  return 0;
}

int run_decompose(const std::string& input, const std::string& dir, const Overrides& o) {
  if (dir.empty()) throw usage_error("dir: required");
  Field f = read_field(input);
  auto e = exponents(o, f.grid().dim);
  e.require_atomic();
  auto dec = atomic_decompose(f, {e.q, e.p, e.delta});
  write_decomposition(dec, dir);
  Field back = reconstruct(dec);
  back += dec.residual;
  emit({{"atoms", dec.entries.size()},
        {"j_min", dec.j_min},
        {"j_max", dec.j_max},
        {"coefficient_functional", coefficient_functional(dec, e.eta)},
        {"hqp_norm", hqp_norm(f, e.q, e.p)},
        {"round_trip_error", sup_norm(f - back)}},
       o.out);
  return 0;
}

int run_reconstruct(const std::string& dir, const std::string& output) {
  if (output.empty()) throw usage_error("output: required");
  auto dec = read_decomposition(dir);
  Field back = reconstruct(dec);
  back += dec.residual;
  write_field(output, back);
  return 0;
}

int run_dual(const std::string& input, const std::string& which, double rprime, const Overrides& o) {
  Field g = read_field(input);
  CampanatoReport rep;
  json j{{"input", input}, {"norm", which}};
  if (which == "bmo") {
    rep = bmo_norm(g);
  } else if (which == "campanato") {
    auto e = exponents(o, g.grid().dim);
    rep = campanato_local_norm(g, {rprime, e.delta}, e.q, e.p);
    j["q"] = e.q;
    j["p"] = e.p;
    j["delta"] = e.delta;
    j["rprime"] = std::isinf(rprime) ? json("inf") : json(rprime);
  } else {
    throw usage_error("norm: expected bmo or campanato");
  }
  j["value"] = rep.norm();
  j["big"] = rep.big;
  j["small"] = rep.small;
  j["argmax_big"] = cube_or_null(rep.argmax_big, rep.big > 0);
  j["argmax_small"] = cube_or_null(rep.argmax_small, rep.small > 0);
  j["cubes"] = rep.cubes;
  emit(j, o.out);
  return 0;
}

int run_psido(const std::string& action, const std::string& symbol, const std::string& input, const Overrides& o) {
  GridSpec g = input.empty() ? make_config("psido", o).grid : read_field(input).grid();
  Symbol sym = load_symbol(symbol, g);
  if (action == "apply") {
    if (input.empty() || o.out.empty()) throw usage_error("apply: --input and --out are required");
    write_field(o.out, apply_psido(sym, read_field(input)));
  } else if (action == "kernel") {
    GridSpec g1 = g;
    auto k = psido_kernel(sym, g1, {g1.size() / 2}, {8});
    auto [r0, r1] = tail_range(g1);
    auto fit = fit_tail(k, g1.dim, r0, r1);
    json series = json::array();
    for (auto [r, v] : fit.series) series.push_back({r, v});
    emit({{"symbol", sym.name}, {"slope", fit.slope}, {"C", fit.C}, {"series", series}}, o.out);
  } else if (action == "seminorms") {
    auto t = symbol_seminorms(sym, g, 1, 2);
    json rows = json::array();
    for (const auto& e : t.entries)
      rows.push_back({{"alpha", {e.alpha[0], e.alpha[1]}}, {"beta", {e.beta[0], e.beta[1]}}, {"C", e.C},
                      {"slope", e.slope}, {"pass", e.pass}});
    emit({{"symbol", sym.name}, {"in_class", t.in_class}, {"first_failure", t.first_failure}, {"entries", rows}},
         o.out);
  } else if (action == "bound") {
    auto e = exponents(o, g.dim);
    auto rng = stream(o.seed.value_or(1), "psido-bound");
    std::vector<Atom> atoms;
    for (int i = 0; i < 20; ++i)
      atoms.push_back(random_atom(g, rng, random_cube(g, rng, dyadic_side(rng, 0.25, 1)), {e.q, inf, e.delta, true}));
    auto rep = psido_atom_bound(sym, atoms, e.q, e.p);
    emit({{"symbol", sym.name}, {"sup", rep.sup}, {"median", rep.median}, {"norms", rep.norms},
          {"domination_small", rep.domination_small}, {"domination_large", rep.domination_large}},
         o.out);
  } else {
    throw usage_error("psido: action must be apply, kernel, seminorms or bound");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"amalgam-lab: Hardy-amalgam numerical experiments"};
  app.require_subcommand(1);
  Overrides o;
  std::string input, variant = "radial", scope = "local", csv, dir, output, which = "bmo", action, symbol;
  double rprime = 1;

  std::map<std::string, CLI::App*> suites;
  for (const auto& name : suite_names()) suites[name] = app.add_subcommand(name, "run the " + name + " suite");
  suites["all"] = app.add_subcommand("all", "run every suite");
  for (auto& [name, sub] : suites) add_overrides(sub, o);
  for (const auto& name : {"maximal", "decompose", "dual", "psido"})
    suites[name]->add_option("--input", input, "field file; switches the command to a single-field verb");
  suites["maximal"]->add_option("--variant", variant, "hl, radial, nontangential or auxiliary");
  suites["maximal"]->add_option("--scope", scope, "local or global");
  suites["maximal"]->add_option("--csv", csv, "pointwise maximal field as CSV");
  suites["decompose"]->add_option("--dir", dir, "decomposition directory");
  suites["dual"]->add_option("--norm", which, "bmo or campanato");
  suites["dual"]->add_option("--rprime", rprime);
  suites["psido"]->add_option("action", action, "apply, kernel, seminorms or bound");
  suites["psido"]->add_option("--symbol", symbol, "symbol JSON file or inline object: {\"template\": ..., parameters}");

  auto* norm = app.add_subcommand("norm", "amalgam norm of a field file");
  add_overrides(norm, o);
  norm->add_option("--input", input)->required();
  auto* rec = app.add_subcommand("reconstruct", "sum a stored decomposition");
  rec->add_option("--dir", dir)->required();
  rec->add_option("--output", output)->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (norm->parsed()) return run_norm(input, o);
    if (rec->parsed()) return run_reconstruct(dir, output);
    for (auto& [name, sub] : suites) {
      if (!sub->parsed()) continue;
      if (name == "maximal" && !input.empty()) return run_maximal(input, variant, scope, csv, o);
      if (name == "decompose" && !input.empty()) return run_decompose(input, dir, o);
      if (name == "dual" && !input.empty()) return run_dual(input, which, rprime, o);
      if (name == "psido" && !action.empty()) return run_psido(action, symbol, input, o);
      auto cfg = make_config(name, o);
      return run_and_write(cfg, std::cout).status;
    }
  } catch (const usage_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const fixture_missing& e) {
    std::cerr << "fixture missing: " << e.what() << '\n';
    return 3;
  } catch (const stale_fixture& e) {
    std::cerr << "stale fixture: " << e.what() << '\n';
    return 3;
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
