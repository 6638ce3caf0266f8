#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace amalgam::lab {

namespace fs = std::filesystem;

bool Report::passed() const {
  for (const auto& a : assertions)
    if (!a.pass) return false;
  return true;
}

void Report::merge(Report&& other) {
  for (auto& a : other.assertions) assertions.push_back(std::move(a));
  for (auto& t : other.table) table.push_back(std::move(t));
  for (auto& s : other.series) series.push_back(std::move(s));
  for (auto [k, v] : other.seconds) seconds[k] += v;
}

Assertion& Report::add(Assertion a) {
  assertions.push_back(std::move(a));
  return assertions.back();
}

std::string number_text(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  return number_text(v);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

nlohmann::json to_json(const Report& r) {
  nlohmann::json out;
  out["passed"] = r.passed();
  auto& list = out["assertions"] = nlohmann::json::array();
  for (const auto& a : r.assertions)
    list.push_back({{"suite", a.suite},
                    {"criterion", a.criterion},
                    {"check", a.check},
                    {"params", a.params},
                    {"relation", a.relation},
                    {"lhs", num(a.lhs)},
                    {"rhs", num(a.rhs)},
                    {"ratio", num(a.ratio)},
                    {"samples", a.samples},
                    {"verdict", a.pass ? "pass" : "fail"},
                    {"note", a.note}});
  return out;
}

void write_report(const Report& r, const nlohmann::json& config, const fs::path& dir) {
  fs::create_directories(dir);
  auto j = to_json(r);
  j["config"] = config;
  std::ofstream(dir / "report.json") << j.dump(2) << '\n';

  std::ofstream csv(dir / "tables.csv");
  csv << "suite,check,params,index,value\n";
  for (const auto& t : r.table)
    csv << csv_field(t.suite) << ',' << csv_field(t.check) << ',' << csv_field(t.params) << ',' << t.index << ','
        << number_text(t.value) << '\n';

  nlohmann::json tj = nlohmann::json::object();
  for (auto [k, v] : r.seconds) tj["criterion " + std::to_string(k)] = v;
  std::ofstream(dir / "timings.json") << tj.dump(2) << '\n';
}

std::vector<fs::path> emit_plots(const Report& r, const fs::path& dir) {
  std::vector<fs::path> out;
  if (r.series.empty()) return out;
  fs::create_directories(dir / "series");
  for (const auto& s : r.series) {
    auto path = dir / "series" / (s.name + ".csv");
    std::ofstream f(path);
    for (std::size_t c = 0; c < s.columns.size(); ++c) f << (c ? "," : "") << csv_field(s.columns[c]);
    f << '\n';
    for (const auto& row : s.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) f << (c ? "," : "") << number_text(row[c]);
      f << '\n';
    }
    out.push_back(path);
  }
  return out;
}

fs::path fresh_run_dir(const fs::path& base, const std::string& name) {
  fs::create_directories(base);
  fs::path p = base / name;
  for (int n = 2; fs::exists(p); ++n) p = base / (name + "-" + std::to_string(n));
  fs::create_directory(p);
  return p;
}

}  // namespace amalgam::lab
