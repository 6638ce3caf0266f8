#include "suites.hpp"

#include <chrono>
#include <cstdio>
#include <ostream>

#include "amalgam/czdecomp.hpp"
#include "amalgam/dual.hpp"
#include "amalgam/psido.hpp"
#include "corpus.hpp"

namespace amalgam::lab {

namespace {

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string qp_text(double q, double p) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "q=%.6g,p=%.6g", q, p);
  return buf;
}

struct Ctx {
  const ExperimentConfig& cfg;
  FixtureStore& fx;
  FixtureMode mode;
  std::string suite;
  Report& rep;

  void le(int crit, const std::string& check, const std::string& params, double lhs, double rhs,
          std::size_t samples = 1, const std::string& note = "") {
    Assertion a{suite, crit, check, params, "<=", lhs, rhs, 0, samples, lhs <= rhs, note};
    a.ratio = rhs != 0 ? lhs / rhs : (lhs == 0 ? 0.0 : inf);
    rep.add(a);
  }
  /// An exact count of violations, asserted zero.
  void none(int crit, const std::string& check, const std::string& params, std::size_t count, std::size_t samples) {
    Assertion a{suite, crit, check, params, "==", double(count), 0, double(count), samples, count == 0, ""};
    rep.add(a);
  }
  void band(int crit, const std::string& check, const std::string& params, const std::vector<double>& values,
            bool upper_only, const std::string& note = "") {
    const std::string key = check + " [" + params + "]";
    Assertion a{suite, crit, check, params, upper_only ? "<=" : "band", 0, 0, 0, values.size(), true, note};
    if (mode == FixtureMode::record) {
      fx.record(suite, key, values, upper_only);
      auto b = fx.band(suite, key);
      a.lhs = b.hi;
      a.rhs = b.hi * fx.slack;
      a.ratio = a.rhs > 0 ? a.lhs / a.rhs : 0.0;
      a.note = note.empty() ? "recorded" : note + "; recorded";
    } else {
      auto v = fx.compare(suite, key, values);
      a.lhs = v.lhs;
      a.rhs = v.rhs;
      a.ratio = v.ratio;
      a.pass = v.pass;
    }
    rep.add(a);
  }
  void row(const std::string& check, const std::string& params, std::size_t i, double value) {
    rep.table.push_back({suite, check, params, i, value});
  }
  template <class Fn>
  void timed(int crit, Fn&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    rep.seconds[crit] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  Rng rng(const std::string& name) const { return stream(cfg.seed, suite + "/" + name); }
};

struct Exps {
  double q, p, eta;
  int delta, N;
};

/// The configured exponent tuple, or the suite's default sweep.
std::vector<Exps> sweep(const ExperimentConfig& cfg, std::vector<Exps> defaults) {
  if (cfg.exponents) {
    auto e = cfg.exponents->resolved(cfg.grid.dim);
    return {{e.q, e.p, e.eta, e.delta, e.N}};
  }
  for (auto& e : defaults) {
    ExponentConfig c{e.q, e.p, inf, e.delta, e.eta, e.N};
    auto r = c.resolved(cfg.grid.dim);
    e = {r.q, r.p, r.eta, r.delta, r.N};
  }
  return defaults;
}

Exps exps(double q, double p, double eta = -1) { return {q, p, eta, -1, -1}; }

double max_of(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, x);
  return m;
}

// ---------------------------------------------------------------------------
void norms_suite(Ctx& c) {
  const auto& g = c.cfg.grid;
  c.timed(1, [&] {
    auto pairs = sweep(c.cfg, {exps(0.5, 0.5), exps(1.0 / 3, 1), exps(1, 1), exps(2, 1), exps(1, 2)});
    Field chi = indicator(g, lattice_cube(g.dim, 0, 0));
    for (const auto& e : pairs)
      c.le(1, "unit cube indicator norm |n - 1|", qp_text(e.q, e.p), std::abs(amalgam_norm(chi, e.q, e.p) - 1), 1e-12);

    auto rng = c.rng("fields");
    std::vector<Field> fields;
    for (int i = 0; i < c.cfg.corpus.norm_fields; ++i) fields.push_back(rough_field(g, rng));
    if (fields.empty()) return;
    std::vector<double> qs{1.0 / 3, 0.5, 1, 2};
    if (c.cfg.exponents) qs = {c.cfg.exponents->q};
    for (double q : qs) {
      double worst = 0;
      for (std::size_t i = 0; i < fields.size(); ++i) {
        double a = amalgam_norm(fields[i], q, q), b = lq_norm(fields[i], q);
        double rel = b > 0 ? std::abs(a - b) / b : std::abs(a);
        c.row("||f||_{q,q} vs ||f||_q relative gap", fmt("q=%.6g", q), i, rel);
        worst = std::max(worst, rel);
      }
      c.le(1, "||f||_{q,q} = ||f||_q", fmt("q=%.6g", q), worst, 1e-12, fields.size());
    }
    for (const auto& e : pairs) {
      for (double scale : {2.0, 4.0}) {
        const double p1 = e.p * scale, q1 = e.q * scale;
        double seq = 0, loc = 0;
        for (const auto& f : fields) {
          auto r = embedding_check(f, e.q, e.p, q1, p1);
          seq = std::max(seq, r.norm_q_p1 / r.norm_q_p);
          loc = std::max(loc, r.norm_q_p / r.norm_q1_p);
        }
        c.le(1, "sequence embedding ||f||_{q,p1} / ||f||_{q,p}", qp_text(e.q, e.p) + fmt(",p1=%.6g", p1), seq,
             1 + 1e-12, fields.size());
        c.le(1, "local embedding ||f||_{q,p} / ||f||_{q1,p}", qp_text(e.q, e.p) + fmt(",q1=%.6g", q1), loc,
             1 + 1e-12, fields.size());
      }
    }
  });

  c.timed(2, [&] {
    std::vector<Field> two{indicator(g, lattice_cube(g.dim, 0, 0)), indicator(g, lattice_cube(g.dim, 1, 0))};
    auto cf = reverse_minkowski_check(two, 0.5, 0.5);
    c.le(2, "two indicators: |sum of norms - 2|", "q=0.5,p=0.5", std::abs(cf.sum_of_norms - 2), 0.0);
    c.le(2, "two indicators: |norm of sum - 4|", "q=0.5,p=0.5", std::abs(cf.norm_of_sum - 4), 0.0);
    c.le(2, "two indicators: sum of norms <= norm of sum", "q=0.5,p=0.5", cf.sum_of_norms, cf.norm_of_sum);

    std::vector<Exps> pairs{exps(0.5, 0.5), exps(1.0 / 3, 1)};
    if (c.cfg.exponents && c.cfg.exponents->q < 1 && c.cfg.exponents->p <= 1)
      pairs = {exps(c.cfg.exponents->q, c.cfg.exponents->p)};
    auto rng = c.rng("tuples");
    std::uniform_int_distribution<int> len(2, 5);
    std::vector<std::vector<Field>> tuples;
    for (int i = 0; i < c.cfg.corpus.minkowski_tuples; ++i) {
      std::vector<Field> t;
      for (int n = len(rng); n > 0; --n) t.push_back(rough_field(g, rng, true));
      tuples.push_back(std::move(t));
    }
    if (tuples.empty()) return;
    for (const auto& e : pairs) {
      double worst = 0;
      for (std::size_t i = 0; i < tuples.size(); ++i) {
        auto r = reverse_minkowski_check(tuples[i], e.q, e.p);
        double ratio = r.norm_of_sum > 0 ? r.sum_of_norms / r.norm_of_sum : 0.0;
        c.row("reverse Minkowski sum of norms / norm of sum", qp_text(e.q, e.p), i, ratio);
        worst = std::max(worst, ratio);
      }
      c.le(2, "reverse Minkowski sum of norms / norm of sum", qp_text(e.q, e.p), worst, 1 + 1e-12, tuples.size());
    }
  });
}

// ---------------------------------------------------------------------------
double hl_indicator_error(const GridSpec& g, Series* out) {
  Field m = hl_maximal(indicator(g, {1, {0, 0}, 1.0}));
  double worst = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    double x = g.point(i)[0];
    if (out && x > -3 && x < 4) out->rows.push_back({x, m[i], x > 1 ? 1 / (2 * x) : (x < 0 ? 1 / (2 * (1 - x)) : 1.0)});
    if (x < 1.5 || x > 4) continue;
    worst = std::max(worst, std::abs(m[i] * 2 * x - 1));
  }
  return worst;
}

void maximal_suite(Ctx& c) {
  const auto& g = c.cfg.grid;
  c.timed(3, [&] {
    GridSpec g1{1, std::max(g.half_width, 5), g.per_unit}, g4{1, std::max(g.half_width, 5), 4 * g.per_unit};
    Series prof{"hl_indicator_profile", {"x", "M_chi", "closed_form"}, {}};
    double e1 = hl_indicator_error(g1, &prof), e4 = hl_indicator_error(g4, nullptr);
    c.le(3, "HL maximal of chi_[0,1] vs 1/(2x), x in [1.5,4]", fmt("M=%g", g1.per_unit), e1, 0.02);
    c.le(3, "HL maximal of chi_[0,1] vs 1/(2x), x in [1.5,4]", fmt("M=%g", g4.per_unit), e4, 0.005);
    c.le(3, "refinement does not increase the error", "M -> 4M", e4, e1);
    c.rep.series.push_back(std::move(prof));
  });

  auto rng = c.rng("fields");
  std::vector<Field> fields;
  for (int i = 0; i < c.cfg.corpus.maximal_fields; ++i) fields.push_back(smooth_field(g, rng));

  c.timed(4, [&] {
    if (fields.empty()) return;
    const std::vector<std::string> names{"grand_nt/grand_radial global", "radial/grand_radial global",
                                         "radial/grand_nt global",       "grand_nt/grand_radial local",
                                         "radial/grand_radial local",    "radial/grand_nt local"};
    auto phi = standard_bump_kernel(g.dim);
    for (const auto& e : sweep(c.cfg, {exps(1, 1), exps(0.5, 0.5)})) {
      const auto params = qp_text(e.q, e.p) + fmt(",N=%g", e.N);
      auto fam = standard_test_family(g.dim, e.N).kernels();
      std::vector<std::vector<double>> ratios(names.size());
      std::size_t violations = 0;
      for (std::size_t i = 0; i < fields.size(); ++i) {
        EquivalenceReport er;
        const std::vector<Kernel> single{phi};
        struct Member {
          const std::vector<Kernel>* kernels;
          Variant variant;
          double EquivalenceNorms::*slot;
        };
        for (const Member& m : {Member{&fam, Variant::radial, &EquivalenceNorms::grand_radial},
                                Member{&fam, Variant::nontangential, &EquivalenceNorms::grand_nontangential},
                                Member{&single, Variant::radial, &EquivalenceNorms::radial}}) {
          MaximalParams pg{Scope::global, m.variant, 1.0}, pl{Scope::local, m.variant, 1.0};
          Field glob = smooth_maximal(fields[i], *m.kernels, pg);
          Field loc = smooth_maximal(fields[i], *m.kernels, pl);
          for (std::size_t x = 0; x < glob.size(); ++x) violations += loc[x] > glob[x];
          er.global.*m.slot = amalgam_norm(glob, e.q, e.p);
          er.local.*m.slot = amalgam_norm(loc, e.q, e.p);
        }
        auto r = er.ratios();
        for (std::size_t k = 0; k < r.size(); ++k) {
          ratios[k].push_back(r[k]);
          c.row(names[k], params, i, r[k]);
        }
      }
      for (std::size_t k = 0; k < names.size(); ++k) c.band(4, "maximal norm ratio " + names[k], params, ratios[k], false);
      c.none(4, "local maximal > global maximal at a grid point", params, violations, fields.size());
    }
  });

  c.timed(5, [&] {
    auto srng = c.rng("split");
    std::vector<Field> split;
    for (int i = 0; i < c.cfg.corpus.split_fields; ++i) split.push_back(smooth_field(g, srng));
    if (split.empty()) return;
    auto psi = frequency_bump_kernel(g.dim);
    std::vector<BandSplit> parts;
    for (const auto& f : split) parts.push_back(bandlimit_split(f));
    for (double t : {2.0, 4.0}) {
      double worst = 0;
      for (const auto& s : parts) worst = std::max(worst, sup_norm(convolve_dilated(s.u, psi, t, {false})));
      c.le(5, "sup |u * phi_t|", fmt("t=%g", t), worst, 1e-12, parts.size());
    }
    for (const auto& e : sweep(c.cfg, {exps(1, 1), exps(0.5, 1)})) {
      MaximalParams glob{Scope::global, Variant::radial};
      glob.check_margin = false;
      MaximalParams loc;
      loc.check_margin = false;
      std::vector<double> ratios;
      for (std::size_t i = 0; i < split.size(); ++i) {
        double r = (hqp_norm(parts[i].u, e.q, e.p, glob) + hqp_norm(parts[i].v, e.q, e.p, loc)) /
                   hqp_norm(split[i], e.q, e.p);
        ratios.push_back(r);
        c.row("(||u||_H + ||v||_Hloc) / ||f||_Hloc", qp_text(e.q, e.p), i, r);
      }
      c.band(5, "(||u||_H + ||v||_Hloc) / ||f||_Hloc", qp_text(e.q, e.p), ratios, false);
    }
  });
}

// ---------------------------------------------------------------------------
void atoms_suite(Ctx& c) {
  const auto& g = c.cfg.grid;
  const int d = g.dim;
  c.timed(6, [&] {
    for (const auto& e : sweep(c.cfg, {exps(0.5, 1)})) {
      const auto params = qp_text(e.q, e.p) + fmt(",delta=%g", e.delta);
      auto rng = c.rng("atoms");
      std::uniform_int_distribution<int> pick(0, 1);
      const double top = d == 1 ? 4.0 : 1.0;
      std::vector<Atom> batch;
      for (int i = 0; i < c.cfg.corpus.atoms; ++i) {
        double side = dyadic_side(rng, 1.0 / 16, top);
        if (d == 2 && side * g.per_unit < 4) side = 4.0 / g.per_unit;
        AtomConfig ac{e.q, pick(rng) ? inf : 2.0, e.delta, true};
        batch.push_back(random_atom(g, rng, random_cube(g, rng, side), ac));
      }
      if (!batch.empty()) {
        std::size_t invalid = 0;
        double worst = 0;
        std::vector<double> dom;
        std::size_t unbounded = 0;
        for (std::size_t i = 0; i < batch.size(); ++i) {
          auto r = validate_atom(batch[i]);
          invalid += !r.valid();
          if (r.moments_required && r.moment_tol > 0) worst = std::max(worst, 1e-10 * r.worst_moment / r.moment_tol);
          double cd = atom_domination_constant(batch[i]);
          if (!std::isfinite(cd)) ++unbounded;
          dom.push_back(cd);
          c.row("domination constant", params, i, cd);
        }
        c.none(6, "generated atoms failing validate_atom", params, invalid, batch.size());
        c.le(6, "moment residual / (||a||_1 (1 + l_Q)^delta)", params, worst, 1e-10, batch.size());
        c.none(6, "atoms with unbounded domination constant", params, unbounded, batch.size());
        c.band(6, "domination constant M_loc a <= C [M chi_Q]^theta / ||chi_Q||_q off 4 sqrt(d) Q", params, dom, true,
               "theta = (d + delta + 1) / d");
      }

      // size sweep; the side-16 cube needs L >= 9 in 1D
      GridSpec gs = g;
      if (d == 1) gs.half_width = std::max(g.half_width, 16);
      auto srng = c.rng("sweep");
      Series ser{"atom_norm_vs_cube_size", {"side", "measure", "sup_norm", "median_norm"}, {}};
      std::vector<Atom> sweep_atoms;
      for (int k = -4; k <= 4; ++k) {
        double side = d == 1 ? std::ldexp(1.0, k) : std::ldexp(1.0, k / 2);
        if (d == 2 && k % 2) continue;
        if (side * gs.per_unit < 1 || side > 2 * gs.half_width - 2 * gs.margin_cells() * gs.h()) continue;
        std::vector<Atom> at;
        for (int n = 0; n < 4; ++n) at.push_back(random_atom(gs, srng, random_cube(gs, srng, side), {e.q, inf, e.delta, true}));
        auto b = atom_uniform_bound(at, e.q, e.p);
        ser.rows.push_back({side, std::pow(side, d), b.sup, b.median});
        for (auto& a : at) sweep_atoms.push_back(std::move(a));
      }
      auto all = atom_uniform_bound(sweep_atoms, e.q, e.p);
      c.band(6, "atom uniform bound sup ||a||_Hloc over |Q| in [1/16, 16]", params, {all.sup}, false);
      c.rep.series.push_back(std::move(ser));
    }
  });
}

// ---------------------------------------------------------------------------
void decompose_suite(Ctx& c) {
  const auto& g = c.cfg.grid;
  const int d = g.dim;
  auto rng = c.rng("fields");
  std::vector<Field> fields;
  for (int i = 0; i < c.cfg.corpus.decompose_fields; ++i) fields.push_back(smooth_field(g, rng));

  c.timed(7, [&] {
    if (fields.empty()) return;
    for (const auto& e : sweep(c.cfg, {exps(0.5, 0.5, 0.25), exps(1, 1, 0.5)})) {
      const auto params = qp_text(e.q, e.p) + fmt(",eta=%g", e.eta) + fmt(",delta=%g", e.delta);
      DecomposeConfig dc{e.q, e.p, e.delta};
      double worst = 0;
      std::vector<double> functional, overlaps;
      std::size_t uncovered = 0, misses = 0, far = 0, disjoint = 0, invalid = 0, atoms = 0;
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const Field& f = fields[i];
        auto dec = atomic_decompose(f, dc);
        Field back = reconstruct(dec);
        back += dec.residual;
        double err = sup_norm(f - back) / sup_norm(f);
        worst = std::max(worst, err);
        double ratio = coefficient_functional(dec, e.eta) / hqp_norm(f, e.q, e.p);
        functional.push_back(ratio);
        c.row("coefficient functional / ||f||_Hloc", params, i, ratio);
        disjoint += dec.nonzero_disjoint_corrections;
        for (const auto& en : dec.entries) invalid += !validate_atom(en.atom).valid();
        atoms += dec.entries.size();
        if (i == 0) {
          Series s{"decomposition_lambda_" + params, {"j", "lambda", "corner0", "corner1", "side"}, {}};
          for (const auto& en : dec.entries)
            s.rows.push_back({double(en.j), en.lambda, en.atom.cube.corner[0], en.atom.cube.corner[1], en.atom.cube.side});
          c.rep.series.push_back(std::move(s));
          c.row("coefficient functional", params, i, coefficient_functional(dec, e.eta));
        }
        auto ls = level_sets(f, {e.q, e.p, dc.truncation, dc.max_levels, dc.check_margin, dc.aperture});
        int ov = 0;
        for (const auto& lv : ls.levels) {
          auto cover = whitney(g, lv.mask);
          auto chk = check_whitney(g, lv.mask, cover);
          uncovered += chk.uncovered;
          misses += chk.dilation_misses;
          far += chk.distance_violations;
          ov = std::max(ov, chk.max_overlap);
        }
        overlaps.push_back(ov);
      }
      c.le(7, "||f - reconstruct - residual||_inf / ||f||_inf", params, worst, 1e-10, fields.size());
      c.band(7, "coefficient functional / ||f||_Hloc", params, functional, true);
      c.none(7, "Whitney: mask cells outside the union of cubes", params, uncovered, fields.size());
      c.none(7, "Whitney: 9d-dilation inside the level set", params, misses, fields.size());
      c.none(7, "Whitney: distance band violations", params, far, fields.size());
      c.band(7, "Whitney: max overlap of dilated cubes (K_d)", params, overlaps, true);
      c.none(7, "c_k^l nonzero on disjoint cubes", params, disjoint, fields.size());
      c.none(7, "decomposition atoms failing validate_atom", params, invalid, atoms);
    }
  });

  c.timed(8, [&] {
    if (fields.empty()) return;
    for (const auto& e : sweep(c.cfg, {exps(0.5, 0.5)})) {
      const auto params = qp_text(e.q, e.p);
      std::size_t mismatched = 0, invalid = 0, not_unit = 0, entries = 0;
      int neighbors = 0;
      for (const auto& f : fields) {
        Field v = bandlimit_split(f).v;
        auto ud = unitcube_decompose(v, e.q, e.p, e.delta);
        Field sum(g);
        for (const auto& en : ud.entries) {
          en.atom.profile.add_to(sum, en.lambda / en.atom.scale);
          invalid += !validate_atom(en.atom).valid();
          not_unit += en.atom.cube.measure() != 1.0;
        }
        entries += ud.entries.size();
        for (std::size_t x = 0; x < v.size(); ++x) mismatched += sum[x] != v[x];
        neighbors = std::max(neighbors, ud.max_neighbors);
      }
      c.none(8, "cells where sum sigma^m b^m != v (bitwise)", params, mismatched, fields.size());
      c.none(8, "unit-cube pieces failing validate_atom", params, invalid, entries);
      c.none(8, "unit-cube pieces with |R^m| != 1", params, not_unit, entries);
      c.le(8, "max neighbors of R^m vs 3^d", params, neighbors, std::pow(3.0, d), fields.size());
    }
  });
}

// ---------------------------------------------------------------------------
void dual_suite(Ctx& c) {
  const auto& g = c.cfg.grid;
  c.timed(9, [&] {
    for (double cst : {-3.0, 0.5, 1.0, 7.25}) {
      Field f = sample(g, [&](const Point&) { return cst; });
      c.le(9, "|bmo(c) - |c||", fmt("c=%g", cst), std::abs(bmo_norm(f).norm() - std::abs(cst)), 1e-10);
    }
    auto prng = c.rng("polynomials");
    for (int delta : {0, 1, 2}) {
      double worst = 0;
      for (int n = 0; n < 3; ++n) {
        Field P = random_polynomial(g, prng, delta);
        for (double rp : {1.0, inf}) {
          auto rep = campanato_local_norm(P, {rp, delta}, 1, 1);
          worst = std::max(worst, rep.small / sup_norm(P));
        }
      }
      c.le(9, "small-cube supremum of a degree <= delta polynomial / sup|P|", fmt("delta=%g", delta), worst, 1e-10, 6);
    }

    auto rng = c.rng("pairs");
    std::uniform_int_distribution<int> count(1, 4);
    std::uniform_real_distribution<double> lam(0.1, 2.0);
    const double top = g.dim == 1 ? 2.0 : 1.0, bottom = g.dim == 1 ? 0.125 : 0.25;
    for (const auto& e : sweep(c.cfg, {exps(1, 1), exps(0.5, 0.5)})) {
      const auto params = qp_text(e.q, e.p) + fmt(",delta=%g", e.delta);
      DualParams prm{1.0, e.delta};
      std::vector<double> ratios;
      double zero_worst = 0;
      for (int i = 0; i < c.cfg.corpus.dual_pairs; ++i) {
        Field gf = smooth_field(g, rng);
        std::vector<DecompositionEntry> combo, small;
        for (int n = count(rng); n > 0; --n) {
          double side = dyadic_side(rng, bottom, top);
          Atom a = random_atom(g, rng, random_cube(g, rng, side), {e.q, inf, e.delta, true});
          double l = lam(rng);
          if (side < 1) small.push_back({l, a});
          combo.push_back({l, std::move(a)});
        }
        auto pr = pairing_experiment(gf, combo, prm, e.q, e.p, e.eta);
        ratios.push_back(pr.ratio);
        c.row("pairing ratio", params, i, pr.ratio);
        if (!small.empty()) {
          double s = 0, mass = 0;
          for (const auto& en : small) {
            const auto& pf = en.atom.profile;
            for (std::size_t k = 0; k < pf.size(); ++k) {
              s += 2.5 * pf.values[k] * en.lambda / en.atom.scale;
              mass += std::abs(2.5 * pf.values[k] * en.lambda / en.atom.scale);
            }
          }
          zero_worst = std::max(zero_worst, std::abs(s) / mass);
        }
      }
      if (ratios.empty()) continue;
      c.band(9, "|int g f| / (||g||_Lloc ||f||_fin)", params, ratios, true);
      c.le(9, "|int c f| / int |c f| for small-cube atoms", params, zero_worst, 1e-12, ratios.size());
    }
  });
}

// ---------------------------------------------------------------------------
double rel_gap(const ComplexField& a, const ComplexField& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return den > 0 ? num / den : num;
}

void psido_suite(Ctx& c) {
  const auto& g = c.cfg.grid;
  const int d = g.dim;
  const double L = g.half_width;
  c.timed(10, [&] {
    auto rng = c.rng("fields");
    Field f = smooth_field(g, rng);

    auto id = apply_psido(identity_symbol(d), f);
    c.le(10, "identity symbol: max |T f - f| / max |f|", "", rel_gap(id, to_complex(f)), 1e-12);
    auto mult = multiplier_symbol(d, [](const Point& xi) { return cplx{1.0 / (1 + xi[0] * xi[0] + xi[1] * xi[1])}; });
    c.le(10, "multiplier symbol: FFT path vs direct sum", "", rel_gap(apply_psido(mult, f), apply_psido(mult, f, PsidoPath::direct)), 1e-12);
    auto a = [](const Point& x) { return cplx{1.5 + std::cos(x[0]), 0.5 * std::sin(x[0] + x[1])}; };
    ComplexField ax(g);
    for (std::size_t i = 0; i < f.size(); ++i) ax[i] = a(g.point(i)) * f[i];
    c.le(10, "x-only symbol vs pointwise product", "", rel_gap(apply_psido(x_symbol(d, a), f, PsidoPath::direct), ax), 1e-12);

    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < g.size(); i += (d == 1 ? 1 : 37)) rows.push_back(i);
    for (const auto& sym : {variable_symbol(d, L), bessel_symbol(d, L), riesz_symbol(d, 1.0 / 64)}) {
      auto freq = apply_psido(sym, f);
      auto kp = kernel_apply(psido_kernel(sym, g, rows), f);
      double num = 0, den = 0;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        num = std::max(num, std::abs(kp[r] - freq[rows[r]]));
        den = std::max(den, std::abs(freq[rows[r]]));
      }
      c.le(10, "frequency path vs kernel path", sym.name, num / den, 1e-8, rows.size());
    }

    std::size_t wrong = 0;
    for (const auto& sym : {bessel_symbol(d, L), variable_symbol(d, L), riesz_symbol(d, 0.25)}) {
      auto t = symbol_seminorms(sym, g, 1, 2);
      wrong += !t.in_class;
      c.row("S0 classification (1 = in class)", sym.name, 0, t.in_class);
    }
    for (const auto& sym : {order_one_symbol(d), oscillating_symbol(d)}) {
      auto t = symbol_seminorms(sym, g, 1, 2);
      wrong += t.in_class;
      c.row("S0 classification (1 = in class)", sym.name, 0, t.in_class);
    }
    c.none(10, "S0 seminorm misclassifications (3 positive, 2 negative controls)", "", wrong, 5);

    // tails are fitted in 1D, where the lattice does not distort the shells,
    // on a grid no coarser than L = 8, M = 64
    GridSpec g1{1, std::max(g.half_width, 8), std::max(g.per_unit, 64)};
    auto riesz = riesz_symbol(1, 1.0 / 64);
    auto [r0, r1] = tail_range(g1);
    const std::size_t mid = g1.size() / 2;
    const double ts = resolved_smoothing(g1);
    for (auto [t, beta] : {std::pair{0.0, 0}, std::pair{ts, 0}, std::pair{ts, 1}}) {
      auto k = psido_kernel(riesz, g1, {mid}, {8, {beta, 0}, t, {}});
      auto fit = fit_tail(k, 1 + beta, r0, r1);
      const auto params = fmt("t=%g", t) + fmt(",beta=%g", beta);
      c.le(10, "kernel tail |slope + d + |beta||", params, std::abs(fit.slope + 1 + beta), 0.15, fit.series.size(),
           fmt("slope %.4f", fit.slope));
      Series s{"kernel_tail_" + params, {"abs_z", "shell_max_abs_K", "fit"}, {}};
      for (auto [r, v] : fit.series) s.rows.push_back({r, v, fit.C * std::pow(r, -(1.0 + beta))});
      c.rep.series.push_back(std::move(s));
    }

    auto arng = c.rng("atoms");
    std::vector<Atom> atoms;
    const double top = d == 1 ? 2.0 : 1.0;
    for (const auto& e : sweep(c.cfg, {exps(0.5, 1)})) {
      const auto params = qp_text(e.q, e.p) + fmt(",delta=%g", e.delta);
      atoms.clear();
      for (int i = 0; i < c.cfg.corpus.psido_atoms; ++i) {
        double side = dyadic_side(arng, d == 1 ? 1.0 / 16 : 0.25, top);
        atoms.push_back(random_atom(g, arng, random_cube(g, arng, side), {e.q, inf, e.delta, true}));
      }
      if (atoms.empty()) continue;
      for (const auto& sym : {bessel_symbol(d, L), variable_symbol(d, L)}) {
        auto rep = psido_atom_bound(sym, atoms, e.q, e.p);
        for (std::size_t i = 0; i < rep.norms.size(); ++i) c.row("||T a||_Hloc", sym.name + "," + params, i, rep.norms[i]);
        c.band(10, "psido atom bound sup ||T a||_Hloc", sym.name + "," + params, {rep.sup}, false);
      }

      auto spec = decay_kernel_spec(d, e.q, 1.0);
      std::vector<Atom> few(atoms.begin(), atoms.begin() + std::min<std::size_t>(atoms.size(), 20));
      auto conv = conv_kernel_experiment(spec, g, few, e.q, e.p);
      c.band(10, "convolution kernel (gamma = 1) atom bound sup", params, {conv.bound.sup}, false);
    }
    // d(1/q - 1) = 1.5 d at q = 0.4 has fractional part 0.5 in 1D and 0 in 2D
    const double q_weak = d == 1 ? 0.4 : 2.0 / 3;
    const double cut = d * (1 / q_weak - 1) - std::floor(d * (1 / q_weak - 1) + 1e-12);
    std::size_t accepted = 0;
    try {
      conv_kernel_experiment(decay_kernel_spec(d, q_weak, cut / 2), g, {}, q_weak, 1.0);
      ++accepted;
    } catch (const precondition_error&) {
    }
    c.none(10, "convolution kernel accepted below the weakened-gamma threshold", fmt("q=%.6g", q_weak) + fmt(",gamma=%g", cut / 2), accepted, 1);

    auto mrng = c.rng("multiply");
    std::vector<Field> fields;
    for (int i = 0; i < 20; ++i) fields.push_back(smooth_field(g, mrng));
    for (const auto& e : sweep(c.cfg, {exps(0.5, 1)})) {
      auto gauss = sample(g, [&](const Point& x) { return std::exp(-(x[0] * x[0] + x[1] * x[1]) / 4); });
      auto rep = schwartz_multiply_bound(gauss, fields, e.q, e.p);
      c.band(10, "Schwartz multiplication ||phi f|| / ||f||", "phi=exp(-|x|^2/4)," + qp_text(e.q, e.p), rep.ratios, false);
    }
  });
}

using SuiteFn = void (*)(Ctx&);

SuiteFn suite_fn(const std::string& name) {
  if (name == "norms") return norms_suite;
  if (name == "maximal") return maximal_suite;
  if (name == "atoms") return atoms_suite;
  if (name == "decompose") return decompose_suite;
  if (name == "dual") return dual_suite;
  if (name == "psido") return psido_suite;
  throw usage_error("suite: unknown suite '" + name + "'");
}

}  // namespace

Report run_suite(const ExperimentConfig& cfg, FixtureStore& fx, FixtureMode mode) {
  validate(cfg);
  std::vector<std::string> names = cfg.suite == "all" ? suite_names() : std::vector<std::string>{cfg.suite};
  Report out;
  for (const auto& name : names) {
    fx.open_suite(name, cfg.hash(name), mode);
    Report r;
    Ctx ctx{cfg, fx, mode, name, r};
    suite_fn(name)(ctx);
    out.merge(std::move(r));
  }
  return out;
}

RunResult run_and_write(const ExperimentConfig& cfg, std::ostream& log) {
  validate(cfg);
  auto fx = FixtureStore::load(cfg.fixtures);
  const auto mode = cfg.record ? FixtureMode::record : FixtureMode::check;
  RunResult res;
  res.report = run_suite(cfg, fx, mode);
  auto dir = fresh_run_dir(cfg.out, cfg.suite + "-" + cfg.hash(cfg.suite) + "-seed" + std::to_string(cfg.seed));
  write_report(res.report, cfg.to_json(), dir);
  emit_plots(res.report, dir);
  if (cfg.record) fx.save(cfg.fixtures);
  res.dir = dir.string();
  std::size_t failed = 0;
  for (const auto& a : res.report.assertions) {
    if (a.pass) continue;
    ++failed;
    log << "FAIL [" << a.suite << "] " << a.check << " {" << a.params << "}: " << number_text(a.lhs) << ' '
        << a.relation << ' ' << number_text(a.rhs) << '\n';
  }
  log << res.report.assertions.size() - failed << '/' << res.report.assertions.size() << " assertions passed; report in "
      << res.dir << '\n';
  res.status = failed ? 1 : 0;
  return res;
}

}  // namespace amalgam::lab
