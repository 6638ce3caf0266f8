#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "amalgam/field_io.hpp"
#include "config.hpp"
#include "corpus.hpp"
#include "decomposition_io.hpp"
#include "fixtures.hpp"
#include "report.hpp"
#include "suites.hpp"

using namespace amalgam;
using namespace amalgam::lab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("amalgam-harness-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig tiny(const std::string& suite) {
  ExperimentConfig cfg;
  cfg.suite = suite;
  cfg.grid = {1, 4, 32};
  cfg.corpus = {4, 4, 2, 2, 10, 2, 3, 2};
  return cfg;
}

template <class E, class Fn>
std::string thrown_message(Fn&& fn) {
  try {
    fn();
  } catch (const E& e) {
    return e.what();
  }
  return "<nothing thrown>";
}

}  // namespace

TEST(Config, DefaultsValidateAndErrorsNameTheField) {
  ExperimentConfig cfg;
  EXPECT_NO_THROW(validate(cfg));
  EXPECT_NO_THROW(validate(smoke_config()));

  auto msg = thrown_message<usage_error>([] {
    ExperimentConfig c;
    apply_json(c, {{"grid", {{"M", 12}}}});
    validate(c);
  });
  EXPECT_EQ(msg.rfind("grid.M:", 0), 0u) << msg;
  msg = thrown_message<usage_error>([] {
    ExperimentConfig c;
    apply_json(c, {{"grid", {{"depth", 1}}}});
  });
  EXPECT_EQ(msg.rfind("grid.depth:", 0), 0u) << msg;
  msg = thrown_message<usage_error>([] {
    ExperimentConfig c;
    apply_json(c, {{"corpus", {{"atoms", "many"}}}});
  });
  EXPECT_EQ(msg.rfind("corpus.atoms:", 0), 0u) << msg;
  msg = thrown_message<usage_error>([] {
    ExperimentConfig c;
    apply_json(c, {{"exponents", {{"q", 0.5}, {"delta", 0}}}});
    validate(c);
  });
  EXPECT_EQ(msg.rfind("exponents:", 0), 0u) << msg;
  msg = thrown_message<usage_error>([] {
    ExperimentConfig c;
    c.suite = "everything";
    validate(c);
  });
  EXPECT_EQ(msg.rfind("suite:", 0), 0u) << msg;
}

TEST(Config, HashTracksExperimentFieldsOnly) {
  ExperimentConfig a, b;
  b.out = "elsewhere";
  b.fixtures = "other.json";
  b.suite = "norms";
  EXPECT_EQ(a.hash("norms"), b.hash("norms"));
  b.grid.per_unit = 128;
  EXPECT_NE(a.hash("norms"), b.hash("norms"));
  ExperimentConfig c;
  c.corpus.atoms = 7;  // not used by the norms suite
  EXPECT_EQ(a.hash("norms"), c.hash("norms"));
  EXPECT_NE(a.hash("atoms"), c.hash("atoms"));
  ExperimentConfig d;
  d.exponents = ExponentConfig{0.5, 0.5};
  EXPECT_NE(a.hash("dual"), d.hash("dual"));
}

TEST(Config, JsonFileRoundTrip) {
  auto dir = scratch("config");
  std::ofstream(dir / "c.json") << R"({"suite": "dual", "seed": 7, "grid": {"dim": 2, "L": 4, "M": 16},
                                     "exponents": {"q": 0.5, "p": 1, "r": "inf"}, "corpus": {"dual_pairs": 3}})";
  auto cfg = load_config((dir / "c.json").string());
  EXPECT_EQ(cfg.suite, "dual");
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.grid.dim, 2);
  ASSERT_TRUE(cfg.exponents.has_value());
  EXPECT_EQ(cfg.exponents->q, 0.5);
  EXPECT_TRUE(std::isinf(cfg.exponents->r));
  EXPECT_EQ(cfg.corpus.dual_pairs, 3);
  EXPECT_THROW(load_config((dir / "missing.json").string()), usage_error);
}

TEST(Fixtures, BandComparisonUsesSlack) {
  FixtureStore fx;
  fx.open_suite("s", "h", FixtureMode::record);
  fx.record("s", "upper", {2.0, 4.0, 3.0}, true);
  fx.record("s", "two-sided", {2.0, 4.0}, false);
  EXPECT_TRUE(fx.compare("s", "upper", {4.9}).pass);     // 4 * 1.25 = 5
  EXPECT_FALSE(fx.compare("s", "upper", {5.1}).pass);
  EXPECT_TRUE(fx.compare("s", "upper", {0.01}).pass);
  EXPECT_TRUE(fx.compare("s", "two-sided", {1.7, 4.9}).pass);  // 2 / 1.25 = 1.6
  auto low = fx.compare("s", "two-sided", {1.5});
  EXPECT_FALSE(low.pass);
  EXPECT_DOUBLE_EQ(low.rhs, 1.6);
  EXPECT_DOUBLE_EQ(low.ratio, 1.6 / 1.5);
  EXPECT_THROW(fx.band("s", "absent"), fixture_missing);
}

TEST(Fixtures, RecordThenCheckThenStale) {
  auto dir = scratch("fixtures");
  auto cfg = tiny("norms");
  cfg.fixtures = (dir / "fx.json").string();
  cfg.out = (dir / "out").string();
  std::ostringstream log;
  cfg.record = true;
  EXPECT_EQ(run_and_write(cfg, log).status, 0) << log.str();
  ASSERT_TRUE(fs::exists(cfg.fixtures));
  cfg.record = false;
  EXPECT_EQ(run_and_write(cfg, log).status, 0) << log.str();

  auto perturbed = cfg;
  perturbed.grid.per_unit = 64;
  EXPECT_THROW(run_and_write(perturbed, log), stale_fixture);
  auto other = tiny("dual");
  other.fixtures = cfg.fixtures;
  other.out = cfg.out;
  EXPECT_THROW(run_and_write(other, log), fixture_missing);
  auto nofile = cfg;
  nofile.fixtures = (dir / "nothing.json").string();
  EXPECT_THROW(run_and_write(nofile, log), fixture_missing);
}

TEST(Suites, EmptyCorpusIsTriviallyPassing) {
  auto cfg = tiny("norms");
  cfg.corpus = {0, 0, 0, 0, 0, 0, 0, 0};
  FixtureStore fx;
  auto rep = run_suite(cfg, fx, FixtureMode::record);
  EXPECT_TRUE(rep.passed());
  for (const auto& a : rep.assertions) EXPECT_EQ(a.samples, 1u) << a.check;
  EXPECT_TRUE(rep.table.empty());
}

TEST(Suites, ReportsAreDeterministicAndRunsAppend) {
  auto dir = scratch("determinism");
  auto cfg = tiny("decompose");
  cfg.seed = 7;
  cfg.record = true;
  cfg.fixtures = (dir / "fx.json").string();
  cfg.out = (dir / "out").string();
  std::ostringstream log;
  auto a = run_and_write(cfg, log);
  auto b = run_and_write(cfg, log);
  EXPECT_NE(a.dir, b.dir);
  EXPECT_TRUE(fs::exists(fs::path(a.dir) / "report.json"));
  EXPECT_EQ(slurp(fs::path(a.dir) / "report.json"), slurp(fs::path(b.dir) / "report.json"));
  EXPECT_EQ(slurp(fs::path(a.dir) / "tables.csv"), slurp(fs::path(b.dir) / "tables.csv"));

  auto other = cfg;
  other.seed = 8;
  auto c = run_and_write(other, log);
  EXPECT_NE(slurp(fs::path(a.dir) / "tables.csv"), slurp(fs::path(c.dir) / "tables.csv"));
}

TEST(Report, JsonCarriesEveryAssertion) {
  Report r;
  r.add({"s", 3, "check", "q=1", "<=", 1.0, 2.0, 0.5, 4, true, ""});
  r.add({"s", 3, "other", "", "==", 1.0, 0.0, 1.0, 1, false, ""});
  auto j = to_json(r);
  EXPECT_FALSE(j["passed"].get<bool>());
  ASSERT_EQ(j["assertions"].size(), 2u);
  EXPECT_EQ(j["assertions"][0]["verdict"], "pass");
  EXPECT_EQ(j["assertions"][1]["verdict"], "fail");
  EXPECT_EQ(j["assertions"][0]["lhs"], 1.0);
  EXPECT_EQ(number_text(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(number_text(0.1), "0.10000000000000001");
}

TEST(Plots, EmptyReportWritesNothing) {
  auto dir = scratch("plots-empty");
  EXPECT_TRUE(emit_plots(Report{}, dir).empty());
  EXPECT_FALSE(fs::exists(dir / "series"));
}

TEST(Plots, KernelTailSeriesIsMonotoneInRadius) {
  auto cfg = tiny("psido");
  FixtureStore fx;
  auto rep = run_suite(cfg, fx, FixtureMode::record);
  int tails = 0;
  for (const auto& s : rep.series) {
    if (s.name.rfind("kernel_tail", 0) != 0) continue;
    ++tails;
    ASSERT_GT(s.rows.size(), 3u);
    for (std::size_t i = 1; i < s.rows.size(); ++i) EXPECT_GT(s.rows[i][0], s.rows[i - 1][0]);
  }
  EXPECT_EQ(tails, 3);
  auto dir = scratch("plots");
  auto files = emit_plots(rep, dir);
  EXPECT_EQ(files.size(), rep.series.size());
  auto first = slurp(files.front());
  EXPECT_EQ(first.find(';'), std::string::npos);
}

TEST(Plots, LambdaSeriesRecomputesTheFunctional) {
  auto cfg = tiny("decompose");
  FixtureStore fx;
  auto rep = run_suite(cfg, fx, FixtureMode::record);
  int checked = 0;
  for (const auto& s : rep.series) {
    if (s.name.rfind("decomposition_lambda_", 0) != 0) continue;
    const std::string params = s.name.substr(std::string("decomposition_lambda_").size());
    double q = 0, p = 0, eta = 0;
    ASSERT_EQ(std::sscanf(params.c_str(), "q=%lf,p=%lf,eta=%lf", &q, &p, &eta), 3);
    std::vector<CoefficientEntry> coeffs;
    for (const auto& row : s.rows) coeffs.push_back({row[1], Cube{1, {row[2], row[3]}, row[4]}});
    double again = coefficient_functional(cfg.grid, coeffs, q, p, eta);
    bool found = false;
    for (const auto& t : rep.table)
      if (t.check == "coefficient functional" && t.params == params) {
        EXPECT_DOUBLE_EQ(again, t.value);
        found = true;
      }
    EXPECT_TRUE(found);
    ++checked;
  }
  EXPECT_EQ(checked, 2);
}

TEST(DecompositionIo, RoundTripIsBitExact) {
  GridSpec g{1, 4, 32};
  auto rng = stream(3, "io");
  Field f = smooth_field(g, rng);
  auto dec = atomic_decompose(f, {0.5, 0.5, 1});
  ASSERT_FALSE(dec.entries.empty());
  auto dir = scratch("io");
  write_decomposition(dec, dir);
  auto back = read_decomposition(dir);
  ASSERT_EQ(back.entries.size(), dec.entries.size());
  EXPECT_EQ(back.j_min, dec.j_min);
  EXPECT_EQ(back.C1, dec.C1);
  Field a = reconstruct(dec), b = reconstruct(back);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
    EXPECT_EQ(dec.residual[i], back.residual[i]);
  }
  for (std::size_t n = 0; n < dec.entries.size(); ++n) {
    EXPECT_EQ(back.entries[n].lambda, dec.entries[n].lambda);
    EXPECT_EQ(back.entries[n].atom.scale, dec.entries[n].atom.scale);
    EXPECT_EQ(validate_atom(back.entries[n].atom).valid(), validate_atom(dec.entries[n].atom).valid());
  }
  std::ifstream side(dir / "atom_00000.json");
  auto j = nlohmann::json::parse(side);
  EXPECT_TRUE(j["verdicts"]["valid"].get<bool>());
}

TEST(Corpus, StreamsAreIndependentAndReproducible) {
  auto a = stream(1, "x"), b = stream(1, "x"), c = stream(1, "y"), d = stream(2, "x");
  auto va = a(), vb = b(), vc = c(), vd = d();
  EXPECT_EQ(va, vb);
  EXPECT_NE(va, vc);
  EXPECT_NE(va, vd);
  GridSpec g{2, 4, 16};
  auto r = stream(5, "fields");
  for (int i = 0; i < 20; ++i) EXPECT_EQ(margin_sup(smooth_field(g, r)), 0.0);
  for (int i = 0; i < 20; ++i) {
    auto q = random_cube(g, r, 0.5);
    auto box = cell_box(g, q);
    EXPECT_GE(box.lo[0], g.margin_cells());
    EXPECT_LE(box.hi[1], g.n() - g.margin_cells());
  }
}

TEST(Fixtures, CheckedInFileCoversEverySuite) {
  const char* path = std::getenv("AMALGAM_FIXTURES");
  if (!path) GTEST_SKIP() << "AMALGAM_FIXTURES not set";
  auto fx = FixtureStore::load(path);
  ExperimentConfig def;
  auto smoke = smoke_config();
  for (const auto& s : suite_names()) {
    EXPECT_NO_THROW(fx.open_suite(s, def.hash(s), FixtureMode::check)) << s;
    EXPECT_NO_THROW(fx.open_suite(s, smoke.hash(s), FixtureMode::check)) << s;
  }
  EXPECT_EQ(fx.slack, 1.25);
}
