// radtrans: run, converge, stability and compare subcommands.
// Exit codes: 0 success, 2 configuration error, 3 solver error, 1 anything else.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "radtrans/errors.hpp"
#include "radtrans/harness.hpp"

namespace fs = std::filesystem;
using namespace radtrans;
using namespace radtrans::harness;

namespace {

int cmd_run(const std::string& config_path, const std::string& out_dir,
            const std::string& snapshots) {
  SimulationConfig cfg = load_config(config_path);
  if (!snapshots.empty()) {
    cfg.snapshots = parse_number_list(snapshots);
    validate_config(cfg);
  }
  const RunResult r = run_simulation(cfg);
  write_outputs(r, out_dir);
  fmt::print("{}: {} steps to t = {:.6g}, {} ({:.3f} s), wrote {}\n", solver_name(cfg.solver),
             r.steps, r.final_time, r.stable ? "stable" : "UNSTABLE", r.wall_seconds, out_dir);
  return r.stable ? 0 : 3;
}

int cmd_converge(const std::string& config_path, const std::string& dx, const std::string& eps,
                 const std::string& out_dir) {
  const SimulationConfig cfg = load_config(config_path);
  const auto dx_list = parse_number_list(dx);
  const auto eps_list = eps.empty() ? std::vector<double>{cfg.epsilon} : parse_number_list(eps);
  const ConvergenceReport report = convergence_study(cfg, dx_list, eps_list);
  std::string csv = "epsilon,dx,error_rho,error_T\n";
  for (const auto& s : report.series) {
    fmt::print("epsilon = {:g}\n", s.epsilon);
    fmt::print("  {:>12} {:>14} {:>14}\n", "dx", "error_rho", "error_T");
    for (const auto& row : s.rows) {
      fmt::print("  {:>12.6g} {:>14.6e} {:>14.6e}\n", row.dx, row.error_rho, row.error_t);
      csv += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", s.epsilon, row.dx, row.error_rho,
                         row.error_t);
    }
    fmt::print("  order rho = {:.4f}, order T = {:.4f}\n", s.order_rho, s.order_t);
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::FILE* f = std::fopen((fs::path(out_dir) / "convergence.csv").c_str(), "wb");
    if (f == nullptr) throw std::runtime_error("cannot write convergence.csv in " + out_dir);
    std::fputs(csv.c_str(), f);
    std::fclose(f);
  }
  return 0;
}

int cmd_stability(const std::string& config_path, const std::string& eps, const std::string& dx,
                  const std::string& cs) {
  const SimulationConfig cfg = load_config(config_path);
  const auto eps_list = eps.empty() ? std::vector<double>{cfg.epsilon} : parse_number_list(eps);
  const auto dx_list = parse_number_list(dx);
  const auto c_list = parse_number_list(cs);
  const StabilityReport report = stability_sweep(cfg, eps_list, dx_list, c_list);
  fmt::print("criterion: {}\n", report.criterion);
  fmt::print("{:>10} {:>10} {:>12}\n", "epsilon", "dx", "largest C");
  for (const auto& cell : report.cells) {
    fmt::print("{:>10g} {:>10.6g} {:>12}\n", cell.epsilon, cell.dx,
               cell.largest_stable_c ? fmt::format("{:g}", *cell.largest_stable_c)
                                     : std::string("none"));
  }
  return 0;
}

int cmd_compare(const std::string& a, const std::string& b, const std::string& field,
                const std::string& norm) {
  const Field f = parse_field(field);
  const Norm n = parse_norm(norm);
  double d = 0.0;
  try {
    d = compare_runs(read_fields(a), read_fields(b), f, n);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("grid", e.what());
  }
  fmt::print("{:.17g}\n", d);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"1D gray radiative transfer solvers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));

  std::string config, out_dir = "out", snapshots, dx, eps, cs, dir_a, dir_b, field = "T",
                      norm = "l1";

  auto* run = app.add_subcommand("run", "run one simulation and write fields, meta and diagnostics");
  run->add_option("config", config, "JSON configuration")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--snapshots", snapshots, "comma-separated snapshot times");

  auto* converge = app.add_subcommand("converge", "self-convergence study");
  converge->add_option("config", config, "JSON configuration")->required();
  converge->add_option("--dx", dx, "grid sizes, each half the previous (e.g. 1/25,1/50)")->required();
  converge->add_option("--eps", eps, "epsilon values (default: the config's)");
  std::string converge_out;
  converge->add_option("--out", converge_out, "directory for convergence.csv");

  auto* stability = app.add_subcommand("stability", "largest stable dt/dx per (epsilon, dx)");
  stability->add_option("config", config, "JSON configuration")->required();
  stability->add_option("--eps", eps, "epsilon values (default: the config's)");
  stability->add_option("--dx", dx, "grid sizes")->required();
  stability->add_option("--C", cs, "candidate constants, ascending")->required();

  auto* compare = app.add_subcommand("compare", "distance between two run outputs");
  compare->add_option("a_dir", dir_a, "first output directory")->required();
  compare->add_option("b_dir", dir_b, "second output directory")->required();
  compare->add_option("--field", field, "T, U or rho");
  compare->add_option("--norm", norm, "l1 or linf");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(config, out_dir, snapshots);
    if (*converge) return cmd_converge(config, dx, eps, converge_out);
    if (*stability) return cmd_stability(config, eps, dx, cs);
    if (*compare) return cmd_compare(dir_a, dir_b, field, norm);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 2;
  } catch (const SolverError& e) {
    fmt::print(stderr, "solver error: {}\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 1;
}
