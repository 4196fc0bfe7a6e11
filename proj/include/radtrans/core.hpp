#pragma once

// Shared domain types for the 1D gray radiative transfer solvers: constants,
// the staggered grid, angular quadrature, opacity models, initial and
// boundary data, and the solver states.

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace radtrans {

struct PhysicalConstants {
  double a = 1.0;        // radiation constant
  double c = 1.0;        // light speed
  double cv = 1.0;       // heat capacity
  double epsilon = 1.0;  // scaled mean free path
  double dd = 3.0;       // diffusion denominator, 3 in slab geometry

  /// Throws std::invalid_argument unless a, c, cv, epsilon, dd are positive
  /// and finite.
  void validate() const;
};

/// Uniform staggered mesh on [x_min, x_max]. Nodes x_0..x_nx bound the cells;
/// cell j is centred at (x_j + x_{j+1}) / 2.
class Grid1D {
 public:
  Grid1D(double x_min, double x_max, std::size_t nx);

  std::size_t nx() const noexcept { return nx_; }
  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  double dx() const noexcept { return dx_; }
  double length() const noexcept { return x_max_ - x_min_; }

  double node(std::size_t i) const noexcept { return x_min_ + static_cast<double>(i) * dx_; }
  double center(std::size_t j) const noexcept {
    return x_min_ + (static_cast<double>(j) + 0.5) * dx_;
  }
  std::vector<double> centers() const;
  std::vector<double> nodes() const;

 private:
  double x_min_;
  double x_max_;
  std::size_t nx_;
  double dx_;
};

/// Positive half of the velocity interval, v in (0, 1). Averages of even
/// integrands are sum_k w_k f(v_k).
struct AngularQuadrature {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
  double max_node() const noexcept { return nodes.empty() ? 0.0 : nodes.back(); }
};

/// Midpoint rule: v_k = (k + 1/2) / nv, w_k = 1 / nv.
AngularQuadrature build_quadrature(std::size_t nv);

/// Dense row-major array; rows index space, columns index velocity.
class Array2D {
 public:
  Array2D() = default;
  Array2D(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> flat() noexcept { return data_; }
  std::span<const double> flat() const noexcept { return data_; }

  bool operator==(const Array2D&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Opacity

struct ConstantOpacity {
  double value = 1.0;
};

/// sigma0 on [0.2, 0.35] and [0.65, 0.8], 1 elsewhere.
struct StripedOpacity {
  double sigma0 = 0.2;
};

/// 10 (x - 1)^4 + 1e-3.
struct VanishingPolyOpacity {};

/// One value per cell centre; the grid must match.
struct TabulatedOpacity {
  std::vector<double> values;
};

using SpatialOpacity =
    std::variant<ConstantOpacity, StripedOpacity, VanishingPolyOpacity, TabulatedOpacity>;

/// sigma_T(x, T) = base(x) / T^3. Only the T-independent factor is ever
/// evaluated; schemes carry K = T^3 multiplicatively.
struct TemperatureDependentOpacity {
  SpatialOpacity base = ConstantOpacity{1.0};
};

using OpacityModel = std::variant<ConstantOpacity, StripedOpacity, VanishingPolyOpacity,
                                  TabulatedOpacity, TemperatureDependentOpacity>;

bool is_temperature_dependent(const OpacityModel& model) noexcept;

/// Opacity at cell centres. For TemperatureDependent this is the base factor
/// only and `temperature` is ignored, as it is for every other variant.
std::vector<double> opacity_at_centers(const OpacityModel& model, const Grid1D& grid,
                                       std::span<const double> temperature = {});

double evaluate_opacity(const SpatialOpacity& profile, double x);

/// Node values from centre values: interior nodes take the arithmetic mean of
/// the two neighbouring centres, the two end nodes copy their only neighbour.
std::vector<double> opacity_at_nodes(std::span<const double> center_values);

// ---------------------------------------------------------------------------
// Boundary data

/// Incoming intensities sampled on the quadrature nodes: left[k] = b_L(v_k),
/// right[k] = b_R(-v_k).
struct TransportBoundary {
  std::vector<double> left;
  std::vector<double> right;

  static TransportBoundary isotropic(std::size_t nv, double left_value, double right_value);
};

struct ZeroFlux {};
struct Dirichlet {
  double temperature = 0.0;
};
using DiffusionBoundarySide = std::variant<ZeroFlux, Dirichlet>;

struct DiffusionBoundary {
  DiffusionBoundarySide left = ZeroFlux{};
  DiffusionBoundarySide right = ZeroFlux{};
};

// ---------------------------------------------------------------------------
// Initial data

/// T = max(1 - 40 (x - 1/2)^2, 0), isotropic I = a c T^4.
struct CompactParabola {};
/// T = max(sin(2 pi (x - 1/4)), 0)^(1/4).
struct SineQuarterPower {};
/// I = value everywhere; T = (value / (a c))^(1/4) unless given.
struct FlatIntensity {
  double value = 1e-16;
  double temperature = -1.0;  // negative: derive from value
};
/// T = amplitude/2 [1 - tanh((x - center) * steepness)].
struct TanhTemperature {
  double center = 0.0024;
  double steepness = 1000.0;
  double amplitude = 1.0;
};
struct UniformTemperature {
  double temperature = 1.0;
};
/// Temperatures per cell, isotropic Planckian intensity.
struct CustomTemperature {
  std::vector<double> temperature;
};

using InitialCondition = std::variant<CompactParabola, SineQuarterPower, FlatIntensity,
                                      TanhTemperature, UniformTemperature, CustomTemperature>;

/// Cell-centre temperatures for an initial condition. Throws
/// std::invalid_argument on negative temperatures or mismatched lengths.
std::vector<double> initial_temperature(const InitialCondition& ic, const Grid1D& grid,
                                        const PhysicalConstants& constants);

// ---------------------------------------------------------------------------
// States

/// Parity form of the intensity: even part E at cell centres [nx][nv], odd part
/// O at nodes [nx+1][nv]. I(+-v) = E +- epsilon O.
struct TransportState {
  Array2D even;
  Array2D odd;
  std::vector<double> temperature;
  std::vector<double> u;  // auxiliary variable, equals T^4 after projection
  double time = 0.0;
};

struct DiffusionState {
  std::vector<double> temperature;
  std::vector<double> u;
  double time = 0.0;
};

TransportState init_transport_state(const InitialCondition& ic, const Grid1D& grid,
                                    const AngularQuadrature& quad,
                                    const PhysicalConstants& constants);

/// Parity split of a sampled anisotropic intensity. plus(j, k) = I(x_j, v_k),
/// minus(j, k) = I(x_j, -v_k) at cell centres; O is interpolated to interior
/// nodes by averaging and copied at the two ends. For small epsilon the odd
/// part can be large.
TransportState transport_state_from_intensity(const Array2D& plus, const Array2D& minus,
                                              std::span<const double> temperature,
                                              const PhysicalConstants& constants);

DiffusionState init_diffusion_state(const InitialCondition& ic, const Grid1D& grid,
                                    const PhysicalConstants& constants);

/// rho_j = sum_k w_k E(j, k).
std::vector<double> density(const TransportState& state, const AngularQuadrature& quad);

// ---------------------------------------------------------------------------
// Solver bookkeeping

struct Tolerances {
  double newton = 1e-12;
  double linear = 1e-12;
  double fixed_point = 1e-10;
  double sigma_floor = 1e-14;
  int max_newton_iterations = 50;
  int max_fixed_point_iterations = 200;
};

struct StepDiagnostics {
  int newton_iterations_max = 0;
  double energy_residual_max = 0.0;
  double min_t = 0.0;
  double max_t = 0.0;
  std::size_t clamped_cells = 0;
  bool stable = true;
};

/// Fills min_t / max_t and marks the step unstable if any value is non-finite.
void summarize_temperature(std::span<const double> temperature, StepDiagnostics& diag);

bool all_finite(std::span<const double> values) noexcept;

}  // namespace radtrans
