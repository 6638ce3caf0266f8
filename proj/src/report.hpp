#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace amalgam::lab {

/// One asserted inequality or identity. `ratio` is lhs / rhs for "<=" checks
/// and the normalized distance to the band for band checks.
struct Assertion {
  std::string suite;
  int criterion = 0;
  std::string check;
  std::string params;
  std::string relation;  ///< "<=", ">=", "band", "==" (exact count or value)
  double lhs = 0, rhs = 0, ratio = 0;
  std::size_t samples = 1;
  bool pass = true;
  std::string note;
};

struct TableRow {
  std::string suite, check, params;
  std::size_t index = 0;
  double value = 0;
};

struct Series {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Report {
  std::vector<Assertion> assertions;
  std::vector<TableRow> table;
  std::vector<Series> series;
  /// Wall time per criterion; kept out of report.json so reruns compare equal.
  std::map<int, double> seconds;

  bool passed() const;
  void merge(Report&& other);
  Assertion& add(Assertion a);
};

nlohmann::json to_json(const Report& r);

/// report.json, tables.csv and timings.json in `dir`.
void write_report(const Report& r, const nlohmann::json& config, const std::filesystem::path& dir);

/// One CSV file per series under dir/series; nothing for an empty report.
std::vector<std::filesystem::path> emit_plots(const Report& r, const std::filesystem::path& dir);

/// `base/name`, or `base/name-2`, `-3`, ... when taken; created on return.
std::filesystem::path fresh_run_dir(const std::filesystem::path& base, const std::string& name);

/// %.17g, "inf", "-inf" or "nan".
std::string number_text(double v);

}  // namespace amalgam::lab
