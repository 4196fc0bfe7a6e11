#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>

#include <fmt/format.h>

#include "radtrans/errors.hpp"
#include "radtrans/harness.hpp"

#ifndef RADTRANS_VERSION
#define RADTRANS_VERSION "0.0.0-unknown"
#endif

namespace radtrans::harness {

namespace fs = std::filesystem;

namespace {

std::string number(double v) { return fmt::format("{:.17g}", v); }

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::system_error(errno, std::generic_category(), "cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw std::system_error(errno, std::generic_category(), "cannot write " + path.string());
}

void write_fields(const fs::path& path, std::span<const double> x, std::span<const double> t,
                  std::span<const double> u, std::span<const double> rho) {
  std::ofstream out = open_output(path);
  std::string text = "x,T,U,rho\n";
  for (std::size_t j = 0; j < x.size(); ++j) {
    text += fmt::format("{},{},{},{}\n", number(x[j]), number(t[j]), number(u[j]), number(rho[j]));
  }
  out << text;
  finish(out, path);
}

double parse_double(std::string_view token, const std::string& context) {
  // strtod rather than stod: subnormal values set ERANGE but are valid output.
  const std::string s(token);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  const auto used = static_cast<std::size_t>(end - s.c_str());
  if (s.empty() || used != s.size() || std::isspace(static_cast<unsigned char>(s.front())) ||
      std::isinf(v)) {
    throw std::invalid_argument(fmt::format("{}: cannot parse '{}' as a number", context, s));
  }
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? text.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string_view version() noexcept { return RADTRANS_VERSION; }

Field parse_field(std::string_view name) {
  if (name == "T") return Field::T;
  if (name == "U") return Field::U;
  if (name == "rho") return Field::Rho;
  throw ConfigError("field", fmt::format("unknown field '{}' (expected T, U or rho)", name));
}

Norm parse_norm(std::string_view name) {
  if (name == "l1") return Norm::L1;
  if (name == "linf") return Norm::LInf;
  throw ConfigError("norm", fmt::format("unknown norm '{}' (expected l1 or linf)", name));
}

Profile profile(const RunResult& result, Field field) {
  switch (field) {
    case Field::T: return {result.x, result.temperature};
    case Field::U: return {result.x, result.u};
    case Field::Rho: return {result.x, result.rho};
  }
  return {};
}

std::vector<double> restrict_pairs(std::span<const double> fine) {
  if (fine.size() % 2 != 0) throw std::invalid_argument("restriction needs an even cell count");
  std::vector<double> coarse(fine.size() / 2);
  for (std::size_t j = 0; j < coarse.size(); ++j) coarse[j] = 0.5 * (fine[2 * j] + fine[2 * j + 1]);
  return coarse;
}

double compare_profiles(const Profile& a, const Profile& b, Norm norm) {
  if (a.x.empty() || b.x.empty() || a.x.size() != a.values.size() ||
      b.x.size() != b.values.size()) {
    throw std::invalid_argument("profiles must be non-empty with matching coordinates");
  }
  auto extent = [](const Profile& p) {
    const double dx = p.x.size() > 1 ? (p.x.back() - p.x.front()) / static_cast<double>(p.x.size() - 1)
                                     : 0.0;
    return std::pair{p.x.front() - 0.5 * dx, p.x.back() + 0.5 * dx};
  };
  const Profile& coarse = a.x.size() <= b.x.size() ? a : b;
  const Profile& fine = a.x.size() <= b.x.size() ? b : a;
  if (coarse.x.size() == 1 && fine.x.size() > 1) {
    throw std::invalid_argument("cannot infer the domain of a single-cell profile");
  }
  const auto [c0, c1] = extent(coarse);
  const auto [f0, f1] = extent(fine);
  const double tol = 1e-9 * std::max(1.0, std::abs(c1 - c0));
  if (coarse.x.size() > 1 && (std::abs(c0 - f0) > tol || std::abs(c1 - f1) > tol)) {
    throw std::invalid_argument("profiles cover different domains");
  }
  std::vector<double> values = fine.values;
  while (values.size() > coarse.values.size()) {
    if (values.size() % 2 != 0) break;
    values = restrict_pairs(values);
  }
  if (values.size() != coarse.values.size()) {
    throw std::invalid_argument(fmt::format("grids with {} and {} cells are not nested by a power of two",
                                            coarse.x.size(), fine.x.size()));
  }
  const double dx = coarse.x.size() > 1 ? (c1 - c0) / static_cast<double>(coarse.x.size()) : 1.0;
  double s = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double d = std::abs(values[j] - coarse.values[j]);
    s = norm == Norm::L1 ? s + d * dx : std::max(s, d);
  }
  return s;
}

double compare_runs(const RunResult& a, const RunResult& b, Field field, Norm norm) {
  return compare_profiles(profile(a, field), profile(b, field), norm);
}

RunResult read_fields(const fs::path& dir) {
  const fs::path path = dir / "fields.csv";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::system_error(errno, std::generic_category(), "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || trim(line) != "x,T,U,rho") {
    throw std::invalid_argument(path.string() + ": expected header x,T,U,rho");
  }
  RunResult r;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cols = split(trim(line), ',');
    const std::string ctx = fmt::format("{}:{}", path.string(), row);
    if (cols.size() != 4) throw std::invalid_argument(ctx + ": expected 4 columns");
    r.x.push_back(parse_double(cols[0], ctx));
    r.temperature.push_back(parse_double(cols[1], ctx));
    r.u.push_back(parse_double(cols[2], ctx));
    r.rho.push_back(parse_double(cols[3], ctx));
  }
  if (r.x.empty()) throw std::invalid_argument(path.string() + ": no data rows");
  r.config.nx = r.x.size();
  return r;
}

void write_outputs(const RunResult& result, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  write_fields(out_dir / "fields.csv", result.x, result.temperature, result.u, result.rho);
  for (const auto& s : result.snapshots) {
    write_fields(out_dir / fmt::format("fields_t{:g}.csv", s.time), result.x, s.temperature, s.u,
                 s.rho);
  }

  {
    const fs::path path = out_dir / "diagnostics.csv";
    std::ofstream out = open_output(path);
    std::string text = "step,t,newton_max,energy_residual_max,minT,maxT,stable\n";
    for (const auto& row : result.diagnostics) {
      const auto& d = row.diagnostics;
      text += fmt::format("{},{},{},{},{},{},{}\n", row.step, number(row.time),
                          d.newton_iterations_max, number(d.energy_residual_max), number(d.min_t),
                          number(d.max_t), d.stable ? 1 : 0);
    }
    out << text;
    finish(out, path);
  }

  {
    nlohmann::json meta;
    meta["version"] = std::string(version());
    meta["config"] = config_to_json(result.config);
    meta["dt"] = result.config.time_step();
    meta["steps"] = result.steps;
    meta["final_time"] = result.final_time;
    meta["stable"] = result.stable;
    meta["stability_criterion"] = stability_criterion(result.config);
    meta["wall_time_seconds"] = result.wall_seconds;
    std::vector<double> times;
    for (const auto& s : result.snapshots) times.push_back(s.time);
    meta["snapshot_times"] = times;
    const fs::path path = out_dir / "meta.json";
    std::ofstream out = open_output(path);
    out << meta.dump(2) << '\n';
    finish(out, path);
  }
}

std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> out;
  for (std::string_view part : split(text, ',')) {
    part = trim(part);
    if (part.empty()) throw ConfigError("list", fmt::format("empty entry in '{}'", text));
    try {
      const std::size_t slash = part.find('/');
      if (slash == std::string_view::npos) {
        out.push_back(parse_double(part, "list"));
      } else {
        const double num = parse_double(trim(part.substr(0, slash)), "list");
        const double den = parse_double(trim(part.substr(slash + 1)), "list");
        if (den == 0.0) throw std::invalid_argument("division by zero");
        out.push_back(num / den);
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError("list", fmt::format("bad entry '{}': {}", part, e.what()));
    }
  }
  return out;
}

}  // namespace radtrans::harness
