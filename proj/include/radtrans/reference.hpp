#pragma once

// Reference solvers used to validate the AP scheme: an explicit upwind
// discrete-ordinates solver for the kinetic regime, and the lagged-opacity
// Picard iteration for sigma/T^3 opacity.

#include <vector>

#include "radtrans/core.hpp"
#include "radtrans/transport_ap.hpp"

namespace radtrans::reference {

/// Intensities per direction as cell averages: plus(j, k) = I(x_j, v_k),
/// minus(j, k) = I(x_j, -v_k).
struct AngularIntensityState {
  Array2D plus;
  Array2D minus;
  std::vector<double> temperature;
  double time = 0.0;
};

AngularIntensityState init_angular_state(const InitialCondition& ic, const Grid1D& grid,
                                         const AngularQuadrature& quad,
                                         const PhysicalConstants& constants);

/// rho_j = sum_k w_k (plus + minus) / 2.
std::vector<double> angular_density(const AngularIntensityState& state,
                                    const AngularQuadrature& quad);

/// Largest internal step the explicit solver takes for this state.
double explicit_stable_dt(const AngularIntensityState& state,
                          const transport::TransportSetup& setup);

/// First-order upwind in space, forward Euler in time for both the
/// intensities and the material equation. Sub-steps internally when dt
/// exceeds explicit_stable_dt. Temperature-dependent opacity is rejected:
/// sigma/T^3 is unbounded at T = 0 and has no explicit treatment.
AngularIntensityState explicit_transport_step(const AngularIntensityState& state, double dt,
                                              const transport::TransportSetup& setup);

/// Net energy entering through the ends per unit time, in the units of
/// sum_j dx (rho_j / c + C_v T_j): (1/eps) sum_k w_k v_k [(b_L - I-_0) - (I+_last - b_R)] / 2.
double explicit_boundary_inflow(const AngularIntensityState& state,
                                const transport::TransportSetup& setup);

struct PicardResult {
  TransportState state;
  int iterations = 0;
  std::vector<double> increments;  // ||U^(k+1) - U^(k)||_inf per iteration
};

/// Implicit step for sigma/T^3 opacity with the opacity lagged at
/// T^(k) = (U^(k))^(1/4); each iterate is one linear solve of the prediction
/// system. Stops when ||U^(k+1) - U^(k)||_inf <= tol max(1, ||U^(k)||_inf).
/// Throws NonConvergenceError after max_iter iterations.
PicardResult iterative_implicit_step(const TransportState& state, double dt,
                                     const transport::TransportSetup& setup, double tol,
                                     int max_iter);

}  // namespace radtrans::reference
