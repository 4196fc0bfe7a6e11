#pragma once

// Asymptotic-preserving prediction-correction-projection scheme for the gray
// radiative transfer equation in even-odd parity form on a staggered grid.
//
// One step:
//   predict                 implicit linear solve for (E*, O*, U*), block
//                           tridiagonal in E* with nv x nv blocks
//   correct_temperature     decoupled per-cell quartic for T^{n+1}
//   correct_fluctuation     one tridiagonal solve per velocity for (E_J, O_J)
//   project                 U = T^4, E = a c U + eps E_J, O = O_J
//
// The *_nlopacity variants treat sigma_T = sigma/T^3 by multiplying the
// transport and time-derivative terms with K = T^3 instead of dividing by it.

#include <vector>

#include "radtrans/core.hpp"

namespace radtrans::transport {

struct TransportSetup {
  Grid1D grid;
  AngularQuadrature quad;
  PhysicalConstants constants;
  OpacityModel opacity = ConstantOpacity{1.0};
  TransportBoundary boundary;
  Tolerances tolerances;
};

struct PredictionOutput {
  Array2D even;  // E* [nx][nv]
  Array2D odd;   // O* [nx+1][nv]
  std::vector<double> u;
};

struct FluctuationOutput {
  Array2D even;  // E_J [nx][nv]
  Array2D odd;   // O_J [nx+1][nv]
  std::vector<double> temperature;
};

struct TemperatureUpdate {
  std::vector<double> temperature;
  int newton_iterations_max = 0;
  std::size_t clamped_cells = 0;
};

struct TransportStepResult {
  TransportState state;
  StepDiagnostics diagnostics;
};

/// Multipliers that distinguish the opacity families inside the shared linear
/// solves. Constant opacity: k_cell = k_node = 1 and u_coupling = T^3.
/// sigma/T^3 opacity: K = T^3 on cells (node values averaged), u_coupling = 1.
struct LinearCoefficients {
  std::vector<double> sigma_cell;
  std::vector<double> sigma_node;
  std::vector<double> k_cell;
  std::vector<double> k_node;
  std::vector<double> u_coupling;
};

LinearCoefficients prediction_coefficients(const TransportState& state,
                                           const TransportSetup& setup);

/// Solves the implicit prediction system for given multipliers. Exposed for
/// the lagged-opacity reference solver.
PredictionOutput solve_prediction(const TransportState& state, double dt,
                                  const TransportSetup& setup, const LinearCoefficients& coeff);

PredictionOutput predict(const TransportState& state, double dt, const TransportSetup& setup);

TemperatureUpdate correct_temperature(const TransportState& state, const PredictionOutput& pred,
                                      double dt, const TransportSetup& setup);

FluctuationOutput correct_fluctuation(const TransportState& state, const PredictionOutput& pred,
                                      std::span<const double> t_new, double dt,
                                      const TransportSetup& setup);

TransportState project(const TransportState& state, std::span<const double> t_new,
                       const FluctuationOutput& fluct, double dt, const TransportSetup& setup);

TransportStepResult ap_step(const TransportState& state, double dt, const TransportSetup& setup);

PredictionOutput predict_nlopacity(const TransportState& state, double dt,
                                   const TransportSetup& setup);

TemperatureUpdate correct_temperature_nlopacity(const TransportState& state,
                                                const PredictionOutput& pred, double dt,
                                                const TransportSetup& setup);

FluctuationOutput correct_fluctuation_nlopacity(const TransportState& state,
                                                const PredictionOutput& pred,
                                                std::span<const double> t_new, double dt,
                                                const TransportSetup& setup);

TransportStepResult ap_step_nlopacity(const TransportState& state, double dt,
                                      const TransportSetup& setup);

/// Discrete energy balance per cell for a constant-opacity step,
///   (<E>^{n+1} - <E>^n)/(c dt) + C_v (T^{n+1} - T^n)/dt + sum_k w_k v_k dO*_k/dx
///     - eps^2/(c sigma dt + eps^2) sum_k w_k v_k d(O* - O^{n+1})_k/dx,
/// with d the node difference across the cell.
std::vector<double> energy_balance_residual(const TransportState& state_n,
                                            const TransportState& state_np1,
                                            const PredictionOutput& pred, double dt,
                                            const TransportSetup& setup);

/// Net radiative energy entering through the two boundary nodes per unit
/// time: sum_k w_k v_k (O_0 - O_nx). Used for free-streaming balance checks.
double boundary_energy_inflow(const Array2D& odd, const AngularQuadrature& quad);

}  // namespace radtrans::transport
