#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "amalgam/amalgam.hpp"
#include "amalgam/grid.hpp"

namespace amalgam::lab {

using json = nlohmann::json;

/// Corpus sizes per experiment; zero means the corpus-driven checks are skipped.
struct CorpusSizes {
  int norm_fields = 100;
  int minkowski_tuples = 200;
  int maximal_fields = 50;
  int split_fields = 30;
  int atoms = 500;
  int decompose_fields = 50;
  int dual_pairs = 100;
  int psido_atoms = 100;
};

struct ExperimentConfig {
  std::string suite = "all";
  GridSpec grid{1, 8, 64};
  /// Overrides the exponent sweep of every suite with a single tuple.
  std::optional<ExponentConfig> exponents;
  std::uint64_t seed = 1;
  CorpusSizes corpus;
  std::string fixtures = "fixtures.json";
  std::string out = "amalgam-out";
  bool record = false;

  /// Fields that determine the numbers a suite produces.
  json experiment_json(const std::string& for_suite) const;
  /// Hex digest of experiment_json(for_suite).
  std::string hash(const std::string& for_suite) const;
  json to_json() const;
};

const std::vector<std::string>& suite_names();

/// d = 2 smoke profile: L = 4, M = 16 with small corpora.
ExperimentConfig smoke_config();

/// Applies the keys of a JSON object; unknown keys and bad values raise
/// usage_error naming the field path.
void apply_json(ExperimentConfig& cfg, const json& j);
ExperimentConfig load_config(const std::string& path);
void validate(const ExperimentConfig& cfg);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace amalgam::lab
