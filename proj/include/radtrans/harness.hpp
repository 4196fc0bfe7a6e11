#pragma once

// Configuration, time-integration driver, experiment sweeps and file output
// behind the radtrans command line.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "radtrans/core.hpp"
#include "radtrans/diffusion.hpp"
#include "radtrans/transport_ap.hpp"

namespace radtrans::harness {

enum class SolverKind {
  Ap,
  ApNlopacity,
  Diffusion3,
  Diffusion3Nlopacity,
  Diffusion2Stage,
  ImplicitDiffusion,
  ImplicitDiffusionT7,
  ExplicitTransport,
  IterativeImplicit,
};

std::string_view solver_name(SolverKind kind) noexcept;
/// Throws ConfigError("solver", ...) for unknown names.
SolverKind parse_solver(std::string_view name);
bool is_transport_solver(SolverKind kind) noexcept;
/// Whether the solver expects sigma/T^3 opacity.
bool needs_temperature_dependent_opacity(SolverKind kind) noexcept;

/// One end of the domain. Transport solvers see the incoming intensity
/// (vacuum 0, incoming value, temperature a c T^4); diffusion solvers see
/// Dirichlet (vacuum T = 0, incoming (value / (a c))^(1/4), temperature T) or
/// zero flux. ZeroFlux is rejected by transport solvers.
struct BoundarySide {
  enum class Kind { Vacuum, Incoming, Temperature, ZeroFlux };
  Kind kind = Kind::Vacuum;
  double value = 0.0;
};

struct BoundarySpec {
  BoundarySide left;
  BoundarySide right;
};

struct SimulationConfig {
  SolverKind solver = SolverKind::Ap;
  std::size_t nx = 100;
  std::size_t nv = 16;
  double epsilon = 1.0;
  double cfl = 0.1;               // dt = cfl * dx unless dt is given
  std::optional<double> dt;
  double tmax = 0.1;
  double x_min = 0.0;
  double x_max = 1.0;
  PhysicalConstants constants;    // epsilon is mirrored from the field above
  OpacityModel opacity = ConstantOpacity{1.0};
  InitialCondition ic = CompactParabola{};
  BoundarySpec bc;
  Tolerances tolerances;
  double blowup_factor = 1e3;
  std::vector<double> snapshots;

  Grid1D grid() const { return Grid1D(x_min, x_max, nx); }
  double time_step() const;
  PhysicalConstants physical_constants() const;
};

/// Parses and validates a JSON configuration. Unknown keys, missing required
/// keys and type mismatches raise ConfigError naming the key.
SimulationConfig parse_config(const nlohmann::json& doc);
SimulationConfig parse_config_text(std::string_view text);
SimulationConfig load_config(const std::filesystem::path& path);

/// Normalised JSON form; parse_config(config_to_json(c)) reproduces c.
nlohmann::json config_to_json(const SimulationConfig& config);

/// Checks cross-field consistency (solver vs opacity, table lengths, ...).
void validate_config(const SimulationConfig& config);

TransportBoundary transport_boundary(const SimulationConfig& config);
DiffusionBoundary diffusion_boundary(const SimulationConfig& config);

/// Stability criterion wording, also written to meta.json.
std::string stability_criterion(const SimulationConfig& config);

struct Snapshot {
  double time = 0.0;
  std::vector<double> temperature;
  std::vector<double> u;
  std::vector<double> rho;
};

struct DiagnosticsRow {
  std::size_t step = 0;
  double time = 0.0;
  StepDiagnostics diagnostics;
};

struct RunResult {
  SimulationConfig config;
  std::vector<double> x;
  std::vector<double> temperature;
  std::vector<double> u;
  std::vector<double> rho;
  std::vector<Snapshot> snapshots;
  std::vector<DiagnosticsRow> diagnostics;
  double final_time = 0.0;
  std::size_t steps = 0;
  bool stable = true;
  double wall_seconds = 0.0;
};

/// Fixed-step loop to tmax. Steps are shortened to land exactly on snapshot
/// times and on tmax. A step that trips the stability flag ends the run with
/// stable = false. Solver failures are rethrown as SolverError naming the step
/// index and time.
RunResult run_simulation(const SimulationConfig& config);

// ---------------------------------------------------------------------------
// Sweeps

struct ConvergenceRow {
  double dx = 0.0;
  double error_rho = 0.0;
  double error_t = 0.0;
};

struct ConvergenceSeries {
  double epsilon = 1.0;
  std::vector<ConvergenceRow> rows;
  double order_rho = 0.0;
  double order_t = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergenceSeries> series;
};

/// Least-squares slope of log(error) against log(dx). With three or more
/// points the coarsest one is dropped when its error ratio to the next point
/// deviates from the median ratio by more than 50%.
double fit_order(std::span<const double> dx, std::span<const double> error);

/// Self-convergence: for each epsilon, runs every dx (each must halve the
/// previous) and reports ||f_dx - R f_{dx/2}||_l1 where R averages fine cell
/// pairs. Runs execute concurrently; results are ordered by parameters.
ConvergenceReport convergence_study(const SimulationConfig& base, std::span<const double> dx_list,
                                    std::span<const double> epsilons);

struct StabilityCell {
  double epsilon = 1.0;
  double dx = 0.0;
  std::optional<double> largest_stable_c;  // empty: unstable at the smallest candidate
};

struct StabilityReport {
  std::string criterion;
  std::vector<StabilityCell> cells;
};

/// For every (epsilon, dx) runs each candidate C (ascending) to tmax and
/// records the last C before the first unstable run. Solver failures count as
/// unstable.
StabilityReport stability_sweep(const SimulationConfig& base, std::span<const double> epsilons,
                                std::span<const double> dx_list,
                                std::span<const double> candidates);

// ---------------------------------------------------------------------------
// Comparison and I/O

enum class Field { T, U, Rho };
enum class Norm { L1, LInf };

Field parse_field(std::string_view name);
Norm parse_norm(std::string_view name);

/// Cell-centre profile on a uniform grid.
struct Profile {
  std::vector<double> x;
  std::vector<double> values;
};

Profile profile(const RunResult& result, Field field);

/// Averages neighbouring pairs: fine cells 2j, 2j+1 onto coarse cell j.
std::vector<double> restrict_pairs(std::span<const double> fine);

/// dx-weighted distance on the coarser of two grids that are equal or nested by
/// a power of two. Throws std::invalid_argument for incompatible grids.
double compare_profiles(const Profile& a, const Profile& b, Norm norm);
double compare_runs(const RunResult& a, const RunResult& b, Field field, Norm norm);

/// Reads fields.csv from an output directory.
RunResult read_fields(const std::filesystem::path& dir);

/// Writes fields.csv, one fields_t<time>.csv per snapshot, meta.json and
/// diagnostics.csv. Numbers carry 17 significant digits.
void write_outputs(const RunResult& result, const std::filesystem::path& out_dir);

/// Parses "1/25,0.01,1e-3" style lists.
std::vector<double> parse_number_list(std::string_view text);

/// Version string baked in at build time.
std::string_view version() noexcept;

}  // namespace radtrans::harness
