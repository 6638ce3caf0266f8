#include "config.hpp"

#include <cstdio>
#include <fstream>
#include <map>

#include "amalgam/errors.hpp"

namespace amalgam::lab {

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw usage_error(path + ": " + what);
}

double number(const json& v, const std::string& path) {
  if (v.is_string() && v.get<std::string>() == "inf") return inf;
  if (!v.is_number()) bad(path, "expected a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) bad(path, "expected an integer");
  return v.get<int>();
}

json exponent_json(const ExponentConfig& e) {
  auto num = [](double x) -> json { return std::isinf(x) ? json("inf") : json(x); };
  return {{"q", e.q}, {"p", e.p}, {"r", num(e.r)}, {"delta", e.delta}, {"eta", e.eta}, {"N", e.N}};
}

json corpus_json(const CorpusSizes& c) {
  return {{"norm_fields", c.norm_fields},     {"minkowski_tuples", c.minkowski_tuples},
          {"maximal_fields", c.maximal_fields}, {"split_fields", c.split_fields},
          {"atoms", c.atoms},                 {"decompose_fields", c.decompose_fields},
          {"dual_pairs", c.dual_pairs},       {"psido_atoms", c.psido_atoms}};
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"norms", "maximal", "atoms", "decompose", "dual", "psido"};
  return names;
}

ExperimentConfig smoke_config() {
  ExperimentConfig cfg;
  cfg.grid = GridSpec{2, 4, 16};
  cfg.corpus = {10, 20, 3, 5, 40, 4, 6, 2};
  return cfg;
}

json ExperimentConfig::experiment_json(const std::string& for_suite) const {
  static const std::map<std::string, std::vector<std::string>> used{
      {"norms", {"norm_fields", "minkowski_tuples"}},
      {"maximal", {"maximal_fields", "split_fields"}},
      {"atoms", {"atoms"}},
      {"decompose", {"decompose_fields"}},
      {"dual", {"dual_pairs"}},
      {"psido", {"psido_atoms"}}};
  json j;
  j["grid"] = {{"dim", grid.dim}, {"L", grid.half_width}, {"M", grid.per_unit}, {"margin", grid.margin}};
  j["exponents"] = exponents ? exponent_json(*exponents) : json(nullptr);
  j["seed"] = seed;
  auto all = corpus_json(corpus);
  json c = json::object();
  auto it = used.find(for_suite);
  if (it == used.end()) {
    c = all;
  } else {
    for (const auto& k : it->second) c[k] = all[k];
  }
  j["corpus"] = c;
  return j;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string ExperimentConfig::hash(const std::string& for_suite) const {
  return fnv1a_hex(experiment_json(for_suite).dump());
}

json ExperimentConfig::to_json() const {
  json j = experiment_json("all");
  j["suite"] = suite;
  return j;
}

void apply_json(ExperimentConfig& cfg, const json& j) {
  if (!j.is_object()) bad("config", "expected a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "suite") {
      if (!v.is_string()) bad(key, "expected a string");
      cfg.suite = v.get<std::string>();
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) bad(key, "expected a nonnegative integer");
      cfg.seed = v.get<std::uint64_t>();
    } else if (key == "fixtures" || key == "out") {
      if (!v.is_string()) bad(key, "expected a string");
      (key == "out" ? cfg.out : cfg.fixtures) = v.get<std::string>();
    } else if (key == "record") {
      if (!v.is_boolean()) bad(key, "expected a boolean");
      cfg.record = v.get<bool>();
    } else if (key == "grid") {
      if (!v.is_object()) bad(key, "expected an object");
      for (const auto& [k, x] : v.items()) {
        const std::string path = "grid." + k;
        if (k == "dim") cfg.grid.dim = integer(x, path);
        else if (k == "L") cfg.grid.half_width = integer(x, path);
        else if (k == "M") cfg.grid.per_unit = integer(x, path);
        else if (k == "margin") cfg.grid.margin = integer(x, path);
        else bad(path, "unknown key");
      }
    } else if (key == "exponents") {
      if (v.is_null()) {
        cfg.exponents.reset();
        continue;
      }
      if (!v.is_object()) bad(key, "expected an object or null");
      ExponentConfig e = cfg.exponents.value_or(ExponentConfig{});
      for (const auto& [k, x] : v.items()) {
        const std::string path = "exponents." + k;
        if (k == "q") e.q = number(x, path);
        else if (k == "p") e.p = number(x, path);
        else if (k == "r") e.r = number(x, path);
        else if (k == "eta") e.eta = number(x, path);
        else if (k == "delta") e.delta = integer(x, path);
        else if (k == "N") e.N = integer(x, path);
        else bad(path, "unknown key");
      }
      cfg.exponents = e;
    } else if (key == "corpus") {
      if (!v.is_object()) bad(key, "expected an object");
      auto& c = cfg.corpus;
      const std::map<std::string, int*> slots{
          {"norm_fields", &c.norm_fields},       {"minkowski_tuples", &c.minkowski_tuples},
          {"maximal_fields", &c.maximal_fields}, {"split_fields", &c.split_fields},
          {"atoms", &c.atoms},                   {"decompose_fields", &c.decompose_fields},
          {"dual_pairs", &c.dual_pairs},         {"psido_atoms", &c.psido_atoms}};
      for (const auto& [k, x] : v.items()) {
        auto it = slots.find(k);
        if (it == slots.end()) bad("corpus." + k, "unknown key");
        *it->second = integer(x, "corpus." + k);
      }
    } else {
      bad(key, "unknown key");
    }
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("config: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw usage_error("config: " + std::string(e.what()));
  }
  ExperimentConfig cfg;
  apply_json(cfg, j);
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  bool known = cfg.suite == "all";
  for (const auto& s : suite_names()) known = known || s == cfg.suite;
  if (!known) bad("suite", "unknown suite '" + cfg.suite + "'");
  const auto& g = cfg.grid;
  if (g.dim != 1 && g.dim != 2) bad("grid.dim", "must be 1 or 2");
  if (g.half_width < 2) bad("grid.L", "must be at least 2");
  if (g.per_unit < 8) bad("grid.M", "must be at least 8");
  if (g.per_unit & (g.per_unit - 1)) bad("grid.M", "must be a power of two");
  if (g.margin >= 0 && 2 * g.margin >= g.n()) bad("grid.margin", "leaves no interior");
  if (cfg.exponents) {
    try {
      cfg.exponents->resolved(g.dim);
    } catch (const error& e) {
      bad("exponents", e.what());
    }
  }
  const std::pair<const char*, int> sizes[]{
      {"norm_fields", cfg.corpus.norm_fields},       {"minkowski_tuples", cfg.corpus.minkowski_tuples},
      {"maximal_fields", cfg.corpus.maximal_fields}, {"split_fields", cfg.corpus.split_fields},
      {"atoms", cfg.corpus.atoms},                   {"decompose_fields", cfg.corpus.decompose_fields},
      {"dual_pairs", cfg.corpus.dual_pairs},         {"psido_atoms", cfg.corpus.psido_atoms}};
  for (const auto& [name, n] : sizes)
    if (n < 0) bad(std::string("corpus.") + name, "must be nonnegative");
}

}  // namespace amalgam::lab
