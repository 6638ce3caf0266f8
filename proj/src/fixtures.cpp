#include "fixtures.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>

#include "amalgam/errors.hpp"

namespace amalgam::lab {

FixtureStore FixtureStore::load(const std::string& path) {
  FixtureStore st;
  st.path_ = path;
  std::ifstream in(path);
  if (!in) return st;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw usage_error("fixtures: " + path + ": " + e.what());
  }
  st.slack = j.value("slack", 1.25);
  for (const auto& [name, list] : j.at("suites").items())
    for (const auto& sec : list) {
      Section s;
      for (const auto& [key, b] : sec.at("bands").items())
        s[key] = {b.at("lo").get<double>(), b.at("hi").get<double>(), b.at("kind") == "upper",
                  b.at("samples").get<std::size_t>()};
      st.suites_[name][sec.at("config_hash").get<std::string>()] = std::move(s);
    }
  return st;
}

nlohmann::json FixtureStore::to_json() const {
  nlohmann::json j;
  j["slack"] = slack;
  j["suites"] = nlohmann::json::object();
  for (const auto& [name, by_hash] : suites_) {
    auto& list = j["suites"][name] = nlohmann::json::array();
    for (const auto& [hash, sec] : by_hash) {
      nlohmann::json bands = nlohmann::json::object();
      for (const auto& [key, b] : sec)
        bands[key] = {{"kind", b.upper_only ? "upper" : "band"}, {"lo", b.lo}, {"hi", b.hi}, {"samples", b.samples}};
      list.push_back({{"config_hash", hash}, {"bands", bands}});
    }
  }
  return j;
}

void FixtureStore::save(const std::string& path) const {
  auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream(path) << to_json().dump(2) << '\n';
}

std::size_t FixtureStore::sections(const std::string& suite) const {
  auto it = suites_.find(suite);
  return it == suites_.end() ? 0 : it->second.size();
}

void FixtureStore::open_suite(const std::string& suite, const std::string& hash, FixtureMode mode) {
  if (mode == FixtureMode::record) {
    suites_[suite][hash] = Section{};
    current_[suite] = hash;
    return;
  }
  auto it = suites_.find(suite);
  if (it == suites_.end() || it->second.empty())
    throw fixture_missing("no fixtures for suite '" + suite + "'" + (path_.empty() ? "" : " in " + path_));
  if (!it->second.count(hash)) {
    std::string have;
    for (const auto& [h, sec] : it->second) have += (have.empty() ? "" : ", ") + h;
    throw stale_fixture("fixtures for suite '" + suite + "' were recorded under config " + have +
                        "; current config is " + hash);
  }
  current_[suite] = hash;
}

const FixtureStore::Section& FixtureStore::section(const std::string& suite) const {
  auto c = current_.find(suite);
  if (c == current_.end()) throw fixture_missing("suite '" + suite + "' was not opened");
  return suites_.at(suite).at(c->second);
}

void FixtureStore::record(const std::string& suite, const std::string& key, const std::vector<double>& values,
                          bool upper_only) {
  Band b;
  b.upper_only = upper_only;
  b.samples = values.size();
  if (!values.empty()) {
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    b.lo = *lo;
    b.hi = *hi;
  }
  suites_.at(suite).at(current_.at(suite))[key] = b;
}

const Band& FixtureStore::band(const std::string& suite, const std::string& key) const {
  const auto& sec = section(suite);
  auto b = sec.find(key);
  if (b == sec.end()) throw fixture_missing("no fixture band '" + key + "' in suite '" + suite + "'");
  return b->second;
}

BandVerdict FixtureStore::compare(const std::string& suite, const std::string& key,
                                  const std::vector<double>& values) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const Band& b = band(suite, key);
  BandVerdict v;
  if (values.empty()) return v;
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double top = b.hi * slack;
  v.lhs = *hi;
  v.rhs = top;
  v.ratio = top > 0 ? *hi / top : (*hi > 0 ? inf : 0.0);
  if (!b.upper_only) {
    const double bottom = b.lo / slack;
    const double r = *lo > 0 ? bottom / *lo : (bottom > 0 ? inf : 0.0);
    if (r > v.ratio) {
      v.lhs = *lo;
      v.rhs = bottom;
      v.ratio = r;
    }
  }
  v.pass = v.ratio <= 1;
  return v;
}

}  // namespace amalgam::lab
