// Acceptance run: one verdict line per criterion 1-10. Each criterion is
// checked at the d = 1 defaults (L = 8, M = 64) and on the d = 2 smoke
// profile (L = 4, M = 16); runtime limits apply to the d = 1 run.
#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "amalgam/errors.hpp"
#include "suites.hpp"

using namespace amalgam;
using namespace amalgam::lab;

namespace {

struct Criterion {
  int id;
  const char* suite;
  const char* title;
  double limit;  ///< seconds at defaults; 0 means none
};

const Criterion criteria[] = {
    {1, "norms", "amalgam exactness and embeddings", 10},
    {2, "norms", "reverse Minkowski", 0},
    {3, "maximal", "HL maximal closed form 1/(2x)", 0},
    {4, "maximal", "maximal equivalence ratio bands, local <= global", 0},
    {5, "maximal", "band-limited split", 0},
    {6, "atoms", "atom validation, uniform bound, pointwise domination", 0},
    {7, "decompose", "atomic decomposition round trip, functional, Whitney invariants", 300},
    {8, "decompose", "unit-cube decomposition", 0},
    {9, "dual", "bmo / Campanato norms and pairing bound", 0},
    {10, "psido", "pseudo-differential suite", 300},
};

struct ProfileRun {
  Report report;
  std::map<std::string, std::string> errors;  ///< suite -> exception text
};

ProfileRun run_profile(ExperimentConfig cfg, FixtureStore& fx, FixtureMode mode) {
  ProfileRun out;
  for (const auto& name : suite_names()) {
    cfg.suite = name;
    try {
      out.report.merge(run_suite(cfg, fx, mode));
    } catch (const error& e) {
      out.errors[name] = e.what();
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria 1-10"};
  std::string fixtures = "tests/fixtures/fixtures.json";
  bool record = false, skip_smoke = false;
  app.add_option("--fixtures", fixtures, "fixture file");
  app.add_flag("--record", record, "record the fixture bands instead of checking them");
  app.add_flag("--skip-smoke", skip_smoke, "d = 1 defaults only");
  CLI11_PARSE(app, argc, argv);

  auto fx = FixtureStore::load(fixtures);
  const auto mode = record ? FixtureMode::record : FixtureMode::check;
  std::vector<std::pair<std::string, ProfileRun>> runs;
  runs.emplace_back("d=1", run_profile(ExperimentConfig{}, fx, mode));
  if (!skip_smoke) runs.emplace_back("d=2", run_profile(smoke_config(), fx, mode));
  if (record) fx.save(fixtures);

  int failed = 0;
  for (const auto& c : criteria) {
    bool ok = true;
    std::size_t count = 0, bad = 0;
    std::vector<std::string> detail;
    for (const auto& [label, run] : runs) {
      if (auto it = run.errors.find(c.suite); it != run.errors.end()) {
        ok = false;
        detail.push_back(label + ": " + it->second);
      }
      for (const auto& a : run.report.assertions) {
        if (a.criterion != c.id) continue;
        ++count;
        if (a.pass) continue;
        ok = false;
        ++bad;
        detail.push_back(label + ": " + a.check + " {" + a.params + "}: " + number_text(a.lhs) + " " + a.relation +
                         " " + number_text(a.rhs));
      }
    }
    if (count == 0 && detail.empty()) {
      ok = false;
      detail.push_back("no assertions ran");
    }
    const auto& base = runs.front().second.report.seconds;
    const double secs = base.count(c.id) ? base.at(c.id) : 0.0;
    char timing[96];
    if (c.limit > 0) {
      std::snprintf(timing, sizeof timing, "%.2f s at defaults (limit %.0f s)", secs, c.limit);
      if (secs > c.limit) {
        ok = false;
        detail.push_back("runtime over the limit");
      }
    } else {
      std::snprintf(timing, sizeof timing, "%.2f s at defaults", secs);
    }
    std::printf("criterion %2d: %s  %s  [%zu assertions, %zu failed, %s]\n", c.id, ok ? "PASS" : "FAIL", c.title, count,
                bad, timing);
    for (const auto& d : detail) std::printf("    %s\n", d.c_str());
    failed += !ok;
  }
  if (record) std::printf("fixtures recorded to %s\n", fixtures.c_str());
  return failed == 0 ? 0 : 1;
}
