#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace amalgam::lab {

/// Recorded range of a corpus constant.
struct Band {
  double lo = 0, hi = 0;
  bool upper_only = true;
  std::size_t samples = 0;
};

struct BandVerdict {
  double lhs = 0;  ///< measured max (or min when the lower edge is the binding one)
  double rhs = 0;  ///< slackened edge
  double ratio = 0;  ///< >1 means outside
  bool pass = true;
};

enum class FixtureMode { record, check };

/// Fixture file: per suite and config hash a set of named bands. Bands are
/// measured in record mode and compared under a multiplicative slack.
class FixtureStore {
 public:
  double slack = 1.25;

  static FixtureStore load(const std::string& path);  ///< empty store when the file is absent
  void save(const std::string& path) const;

  /// Selects the (suite, hash) section. Record mode clears it; check mode
  /// raises fixture_missing when the suite has no section and stale_fixture
  /// when none matches the hash.
  void open_suite(const std::string& suite, const std::string& hash, FixtureMode mode);

  void record(const std::string& suite, const std::string& key, const std::vector<double>& values, bool upper_only);
  const Band& band(const std::string& suite, const std::string& key) const;
  BandVerdict compare(const std::string& suite, const std::string& key, const std::vector<double>& values) const;

  bool has_suite(const std::string& suite) const { return suites_.count(suite) > 0; }
  std::size_t sections(const std::string& suite) const;
  nlohmann::json to_json() const;

 private:
  using Section = std::map<std::string, Band>;
  const Section& section(const std::string& suite) const;
  std::map<std::string, std::map<std::string, Section>> suites_;  ///< suite -> hash -> bands
  std::map<std::string, std::string> current_;                   ///< suite -> open hash
  std::string path_;
};

}  // namespace amalgam::lab
