#pragma once

// Solvers for the nonlinear degenerate diffusion limit
//   a d_t T^4 + C_v d_t T = d_x( a c / (D sigma) d_x T^4 )
// on cell centres: the prediction-correction-projection scheme (constant and
// sigma/T^3 opacity), a two-stage variant kept as a negative control, and
// fully implicit Newton references.

#include <vector>

#include "radtrans/core.hpp"
#include "radtrans/linalg.hpp"

namespace radtrans::diffusion {

struct DiffusionSetup {
  Grid1D grid;
  PhysicalConstants constants;
  OpacityModel opacity = ConstantOpacity{1.0};
  DiffusionBoundary boundary;
  Tolerances tolerances;
};

struct DiffusionStepResult {
  DiffusionState state;
  StepDiagnostics diagnostics;
};

/// Linear prediction stage: solves
///   (U* - U^n)/dt = 4T^3/(4aT^3 + C_v) * div(kappa grad U*)
/// with the mobility frozen at time n. kappa = a c/(D sigma) on faces for
/// constant-in-T opacity and the face mean of a c T^3/(D sigma) otherwise.
std::vector<double> predict_u(const DiffusionState& state, double dt, const DiffusionSetup& setup);

/// Three-stage step: prediction, per-cell quartic correction in discrete
/// divergence form, projection U = T^4.
DiffusionStepResult diffusion3_step(const DiffusionState& state, double dt,
                                    const DiffusionSetup& setup);

/// Four-stage step for sigma/T^3 opacity. The correction flux coefficient is
/// rebuilt from T* = (U*)^(1/4).
DiffusionStepResult diffusion3_nlopacity_step(const DiffusionState& state, double dt,
                                              const DiffusionSetup& setup);

/// Prediction followed directly by T = U^(1/4). Cells with T^n = 0 have zero
/// mobility and never heat up, so compact supports are frozen.
DiffusionStepResult diffusion2stage_step(const DiffusionState& state, double dt,
                                         const DiffusionSetup& setup);

/// Backward Euler in T for constant-in-T opacity, solved by damped Newton.
DiffusionStepResult implicit_diffusion_step(const DiffusionState& state, double dt,
                                            const DiffusionSetup& setup);

/// Backward Euler for sigma/T^3 opacity written with the T^7 flux,
///   (4 a c / (7 D dx^2)) [ (1/sigma)_{f+}(T_{j+1}^7 - T_j^7) - (1/sigma)_{f-}(T_j^7 - T_{j-1}^7) ],
/// where face values of 1/sigma are arithmetic means of the cell values.
DiffusionStepResult implicit_diffusion_T7_step(const DiffusionState& state, double dt,
                                               const DiffusionSetup& setup);

/// Residual of the implicit systems, scaled by dt (energy density units).
/// Exposed for Jacobian checks.
std::vector<double> implicit_residual(const DiffusionState& state, std::span<const double> t_new,
                                      double dt, const DiffusionSetup& setup, bool t7_flux);
linalg::Tridiagonal implicit_jacobian(std::span<const double> t_new, double dt,
                                      const DiffusionSetup& setup, bool t7_flux);

}  // namespace radtrans::diffusion
