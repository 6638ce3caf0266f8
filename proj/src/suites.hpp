#pragma once

#include <iosfwd>
#include <string>

#include "config.hpp"
#include "fixtures.hpp"
#include "report.hpp"

namespace amalgam::lab {

/// Runs `cfg.suite` (or every suite for "all") against the fixture store.
Report run_suite(const ExperimentConfig& cfg, FixtureStore& fx, FixtureMode mode);

struct RunResult {
  Report report;
  std::string dir;  ///< run directory holding report.json
  int status = 0;   ///< 0 iff every assertion passed
};

/// Validates, loads fixtures, runs, writes the run directory and, in record
/// mode, the fixture file.
RunResult run_and_write(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace amalgam::lab
