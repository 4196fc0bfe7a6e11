#include "radtrans/transport_ap.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "radtrans/errors.hpp"
#include "radtrans/linalg.hpp"

namespace radtrans::transport {

namespace {

double pow4(double t) {
  const double t2 = t * t;
  return t2 * t2;
}

void check_inputs(const TransportState& state, double dt, const TransportSetup& setup) {
  const std::size_t nx = setup.grid.nx();
  const std::size_t nv = setup.quad.size();
  if (nx < 2) throw std::invalid_argument("transport schemes need at least two cells");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be > 0");
  if (state.even.rows() != nx || state.even.cols() != nv || state.odd.rows() != nx + 1 ||
      state.odd.cols() != nv || state.temperature.size() != nx || state.u.size() != nx) {
    throw std::invalid_argument("transport state does not match grid and quadrature");
  }
  if (setup.boundary.left.size() != nv || setup.boundary.right.size() != nv) {
    throw std::invalid_argument("boundary data must be sampled on every velocity node");
  }
}

std::vector<double> cube_at_nodes(std::span<const double> k_cell) {
  return opacity_at_nodes(k_cell);
}

// Node relation O_n = g_n + p_n (X_n - X_{n-1}) for interior nodes, and the
// induced flux difference D_j = O_{j+1} - O_j per cell expressed as
//   D_j = cm X_{j-1} + c0 X_j + cp X_{j+1} + d.
// `ghost_scale` is the coefficient of X in the ghost relation
// O_0 = ghost_left - ghost_scale X_0 - O_1, O_nx = ghost_right + ghost_scale X_{nx-1} - O_{nx-1}.
struct FluxStencil {
  double cm = 0.0;
  double c0 = 0.0;
  double cp = 0.0;
  double d = 0.0;
};

FluxStencil flux_stencil(std::size_t j, std::size_t nx, std::span<const double> g,
                         std::span<const double> p, double ghost_scale, double ghost_left,
                         double ghost_right) {
  FluxStencil s;
  if (j == 0) {
    // O_1 - O_0 = 2 O_1 - ghost_left + ghost_scale X_0
    s.c0 = -2.0 * p[1] + ghost_scale;
    s.cp = 2.0 * p[1];
    s.d = 2.0 * g[1] - ghost_left;
  } else if (j + 1 == nx) {
    // O_nx - O_{nx-1} = ghost_right + ghost_scale X_{nx-1} - 2 O_{nx-1}
    s.c0 = ghost_scale - 2.0 * p[nx - 1];
    s.cm = 2.0 * p[nx - 1];
    s.d = ghost_right - 2.0 * g[nx - 1];
  } else {
    s.cm = p[j];
    s.c0 = -p[j + 1] - p[j];
    s.cp = p[j + 1];
    s.d = g[j + 1] - g[j];
  }
  return s;
}

TransportStepResult finish_step(const TransportState& state, const TransportState& next,
                                const PredictionOutput& pred, const TemperatureUpdate& tu,
                                double dt, const TransportSetup& setup, bool energy_residual) {
  TransportStepResult out;
  out.state = next;
  out.diagnostics.newton_iterations_max = tu.newton_iterations_max;
  out.diagnostics.clamped_cells = tu.clamped_cells;
  summarize_temperature(out.state.temperature, out.diagnostics);
  if (!all_finite(out.state.even.flat()) || !all_finite(out.state.odd.flat())) {
    out.diagnostics.stable = false;
  }
  if (energy_residual && out.diagnostics.stable) {
    const auto r = energy_balance_residual(state, next, pred, dt, setup);
    double m = 0.0;
    for (std::size_t j = 1; j + 1 < r.size(); ++j) m = std::max(m, std::abs(r[j]));
    out.diagnostics.energy_residual_max = m;
  } else {
    out.diagnostics.energy_residual_max = energy_residual ? INFINITY : NAN;
  }
  return out;
}

TemperatureUpdate solve_temperature(const TransportState& state, const PredictionOutput& pred,
                                    double dt, const TransportSetup& setup,
                                    std::span<const double> sigma, std::span<const double> k_cell) {
  const std::size_t nx = setup.grid.nx();
  const std::size_t nv = setup.quad.size();
  const auto& kc = setup.constants;
  const double eps2 = kc.epsilon * kc.epsilon;
  const double dx = setup.grid.dx();
  const double alpha = kc.a / dt;
  // Boundary cells close the ghost flux with their new Planckian instead of
  // a c U*, so a cold cell next to an inflow cannot absorb an O(1/eps) flux
  // computed from a prediction that was decoupled from it.
  double ghost = 0.0;
  for (std::size_t k = 0; k < nv; ++k) ghost += setup.quad.weights[k] * setup.quad.nodes[k];
  ghost *= 2.0 * kc.a * kc.c / (kc.epsilon * dx);
  TemperatureUpdate out;
  out.temperature.resize(nx);
  for (std::size_t j = 0; j < nx; ++j) {
    const double tn = state.temperature[j];
    const bool free_streaming = sigma[j] <= setup.tolerances.sigma_floor;
    if (free_streaming && k_cell[j] > 0.0) {
      out.temperature[j] = tn;
      continue;
    }
    double beta = kc.cv / dt;
    if (!free_streaming) beta += eps2 * kc.cv * k_cell[j] / (kc.c * sigma[j] * dt * dt);
    double source = 0.0;
    for (std::size_t k = 0; k < nv; ++k) {
      source += setup.quad.weights[k] *
                (state.even(j, k) / (kc.c * dt) -
                 setup.quad.nodes[k] * (pred.odd(j + 1, k) - pred.odd(j, k)) / dx);
    }
    const double sides = (j == 0 ? 1.0 : 0.0) + (j + 1 == nx ? 1.0 : 0.0);
    const double gamma = beta * tn + source + sides * ghost * pred.u[j];
    linalg::QuarticRoot root;
    try {
      root = linalg::newton_quartic(alpha + sides * ghost, beta, gamma, tn, setup.tolerances.newton,
                                    std::max(setup.tolerances.max_newton_iterations, 100));
    } catch (const NonConvergenceError& e) {
      throw NonConvergenceError("temperature correction failed in cell " + std::to_string(j),
                                e.last_norm());
    }
    out.temperature[j] = root.value;
    out.newton_iterations_max = std::max(out.newton_iterations_max, root.iterations);
    if (root.clamped) ++out.clamped_cells;
  }
  return out;
}

FluctuationOutput solve_fluctuation(const TransportState& state, std::span<const double> t_new,
                                    double dt, const TransportSetup& setup,
                                    std::span<const double> sigma_cell,
                                    std::span<const double> sigma_node,
                                    std::span<const double> k_cell,
                                    std::span<const double> k_node) {
  const std::size_t nx = setup.grid.nx();
  const std::size_t nv = setup.quad.size();
  const auto& kc = setup.constants;
  const double eps = kc.epsilon;
  const double eps2 = eps * eps;
  const double ac = kc.a * kc.c;
  const double dx = setup.grid.dx();
  const double lambda = 1.0 / (kc.c * dt);

  std::vector<double> u(nx);
  for (std::size_t j = 0; j < nx; ++j) u[j] = pow4(t_new[j]);

  FluctuationOutput out;
  out.temperature.assign(t_new.begin(), t_new.end());
  out.even = Array2D(nx, nv);
  out.odd = Array2D(nx + 1, nv);

  std::vector<double> g(nx + 1), p(nx + 1);
  linalg::Tridiagonal sys(nx);
  std::vector<double> rhs(nx);
  for (std::size_t k = 0; k < nv; ++k) {
    const double v = setup.quad.nodes[k];
    for (std::size_t n = 1; n < nx; ++n) {
      const double den = lambda * k_node[n] + sigma_node[n] / eps2;
      if (den > 0.0) {
        g[n] = k_node[n] *
               (lambda * state.odd(n, k) - ac * v / (eps2 * dx) * (u[n] - u[n - 1])) / den;
        p[n] = -k_node[n] * v / (eps * dx) / den;
      } else {
        g[n] = 0.0;
        p[n] = 0.0;
      }
    }
    const double ghost_left = (2.0 / eps) * (setup.boundary.left[k] - ac * u[0]);
    const double ghost_right = (2.0 / eps) * (ac * u[nx - 1] - setup.boundary.right[k]);
    for (std::size_t j = 0; j < nx; ++j) {
      const FluxStencil s = flux_stencil(j, nx, g, p, 2.0, ghost_left, ghost_right);
      const double relax = lambda * eps * k_cell[j] + sigma_cell[j] / eps;
      const double f = k_cell[j] * v / dx;
      if (relax == 0.0 && f == 0.0) {
        sys.diag[j] = 1.0;
        sys.lower[j] = 0.0;
        sys.upper[j] = 0.0;
        rhs[j] = 0.0;
        continue;
      }
      sys.diag[j] = relax + f * s.c0;
      sys.lower[j] = f * s.cm;
      sys.upper[j] = f * s.cp;
      rhs[j] = lambda * k_cell[j] * (state.even(j, k) - ac * u[j]) - f * s.d;
    }
    std::vector<double> ej;
    try {
      ej = linalg::thomas_solve(sys, rhs);
    } catch (const SingularSystemError& e) {
      throw SingularSystemError("fluctuation system singular at cell " +
                                    std::to_string(e.index()) + ", velocity " + std::to_string(k),
                                e.index());
    }
    for (std::size_t j = 0; j < nx; ++j) out.even(j, k) = ej[j];
    for (std::size_t n = 1; n < nx; ++n) out.odd(n, k) = g[n] + p[n] * (ej[n] - ej[n - 1]);
    out.odd(0, k) = ghost_left - 2.0 * ej[0] - out.odd(1, k);
    out.odd(nx, k) = ghost_right + 2.0 * ej[nx - 1] - out.odd(nx - 1, k);
  }
  if (!all_finite(out.even.flat()) || !all_finite(out.odd.flat())) {
    throw InstabilityError("fluctuation solve produced non-finite values");
  }
  return out;
}

LinearCoefficients nonlinear_fluctuation_coefficients(std::span<const double> t_new,
                                                      const TransportSetup& setup) {
  LinearCoefficients c;
  c.sigma_cell = opacity_at_centers(setup.opacity, setup.grid);
  c.sigma_node = opacity_at_nodes(c.sigma_cell);
  c.k_cell.resize(t_new.size());
  for (std::size_t j = 0; j < t_new.size(); ++j) c.k_cell[j] = t_new[j] * t_new[j] * t_new[j];
  c.k_node = cube_at_nodes(c.k_cell);
  return c;
}

}  // namespace

LinearCoefficients prediction_coefficients(const TransportState& state,
                                           const TransportSetup& setup) {
  LinearCoefficients c;
  const std::size_t nx = setup.grid.nx();
  c.sigma_cell = opacity_at_centers(setup.opacity, setup.grid);
  c.sigma_node = opacity_at_nodes(c.sigma_cell);
  std::vector<double> t3(nx);
  for (std::size_t j = 0; j < nx; ++j) {
    const double t = state.temperature[j];
    t3[j] = t * t * t;
  }
  if (is_temperature_dependent(setup.opacity)) {
    c.k_cell = t3;
    c.k_node = cube_at_nodes(t3);
    c.u_coupling.assign(nx, 1.0);
  } else {
    c.k_cell.assign(nx, 1.0);
    c.k_node.assign(nx + 1, 1.0);
    c.u_coupling = t3;
  }
  return c;
}

PredictionOutput solve_prediction(const TransportState& state, double dt,
                                  const TransportSetup& setup, const LinearCoefficients& coeff) {
  check_inputs(state, dt, setup);
  const std::size_t nx = setup.grid.nx();
  const std::size_t nv = setup.quad.size();
  const auto& kc = setup.constants;
  const double eps = kc.epsilon;
  const double eps2 = eps * eps;
  const double ac = kc.a * kc.c;
  const double dx = setup.grid.dx();
  const double lambda = 1.0 / (kc.c * dt);
  const auto& w = setup.quad.weights;
  const auto& vel = setup.quad.nodes;

  // O*_n = g_n + p_n (E*_n - E*_{n-1}) at interior nodes, per velocity.
  Array2D g(nx + 1, nv), p(nx + 1, nv);
  for (std::size_t n = 1; n < nx; ++n) {
    const double den = lambda * coeff.k_node[n] + coeff.sigma_node[n] / eps2;
    if (!(den > 0.0)) continue;
    for (std::size_t k = 0; k < nv; ++k) {
      g(n, k) = lambda * coeff.k_node[n] * state.odd(n, k) / den;
      p(n, k) = -coeff.k_node[n] * vel[k] / (eps2 * dx) / den;
    }
  }

  // U*_j = U^n_j + ub_j (sum_k w_k E*_jk - a c U^n_j); theta_j is the share of the
  // relaxation gap that stays on the material side.
  std::vector<double> ub(nx), theta(nx);
  for (std::size_t j = 0; j < nx; ++j) {
    const double s = coeff.sigma_cell[j] / eps2;
    const double den = kc.cv / dt + 4.0 * s * coeff.u_coupling[j] * ac;
    ub[j] = 4.0 * s * coeff.u_coupling[j] / den;
    theta[j] = kc.cv / dt / den;
  }

  // Solved in increment form E* = E^n + dE. The right-hand side is the
  // residual at E^n written so that it vanishes exactly at equilibrium.
  //
  // Each cell block is diag(d_k + s) - s (1 - theta) 1 w^T, whose mean mode has
  // coefficient s theta ~ s eps^2. Assembled directly, that coefficient and the
  // mean of the right-hand side both emerge from cancelling O(s) terms. The
  // unknowns are therefore the angular mean M = sum_k w_k dE_k (slot 0) and the
  // deviations dE_k - M for k >= 1, scaled by q = 1 / (1 + s); the k = 0
  // deviation follows from sum_k w_k (dE_k - M) = 0. The k = 0 row is replaced
  // by the w-weighted sum of all rows, formed analytically, so the isotropic
  // scattering drops out of it exactly.
  Array2D dk(nx, nv), lo(nx, nv), up(nx, nv), rhs(nx, nv);
  std::vector<double> gap(nx, 0.0), mean_rhs(nx, 0.0);
  for (std::size_t j = 0; j < nx; ++j) {
    for (std::size_t m = 0; m < nv; ++m) gap[j] += w[m] * (ac * state.u[j] - state.even(j, m));
  }
  std::vector<double> gk(nx + 1), pk(nx + 1), on(nx + 1);
  for (std::size_t k = 0; k < nv; ++k) {
    for (std::size_t n = 0; n <= nx; ++n) {
      gk[n] = g(n, k);
      pk[n] = p(n, k);
    }
    for (std::size_t n = 1; n < nx; ++n) {
      on[n] = gk[n] + pk[n] * (state.even(n, k) - state.even(n - 1, k));
    }
    on[0] = (2.0 / eps) * (setup.boundary.left[k] - state.even(0, k)) - on[1];
    on[nx] = (2.0 / eps) * (state.even(nx - 1, k) - setup.boundary.right[k]) - on[nx - 1];
    const double ghost_left = (2.0 / eps) * setup.boundary.left[k];
    const double ghost_right = -(2.0 / eps) * setup.boundary.right[k];
    for (std::size_t j = 0; j < nx; ++j) {
      const FluxStencil st = flux_stencil(j, nx, gk, pk, 2.0 / eps, ghost_left, ghost_right);
      const double kj = coeff.k_cell[j];
      const double s = coeff.sigma_cell[j] / eps2;
      const double f = kj * vel[k] / dx;
      dk(j, k) = lambda * kj + f * st.c0;
      if (j > 0) lo(j, k) = f * st.cm;
      if (j + 1 < nx) up(j, k) = f * st.cp;
      double isotropy = 0.0;
      for (std::size_t m = 0; m < nv; ++m) isotropy += w[m] * (state.even(j, m) - state.even(j, k));
      const double streaming = -f * (on[j + 1] - on[j]);
      rhs(j, k) = streaming + s * isotropy + s * theta[j] * gap[j];
      mean_rhs[j] += w[k] * streaming;
    }
  }

  std::vector<double> q(nx);
  for (std::size_t j = 0; j < nx; ++j) q[j] = 1.0 / (1.0 + coeff.sigma_cell[j] / eps2);
  // Fills blk = R diag(a + shift) S for the unknowns of cell col, where S is the
  // change of unknowns and R swaps row 0 for the weighted row sum. mean_shift is
  // the mean-column contribution of the isotropic coupling.
  auto assemble = [&](Eigen::MatrixXd& blk, const Array2D& a, std::size_t row, std::size_t col,
                      double shift, double mean_shift) {
    double mean = mean_shift;
    for (std::size_t k = 0; k < nv; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      mean += w[k] * a(row, k);
      if (k == 0) continue;
      blk(kk, 0) = a(row, k) + mean_shift;
      blk(kk, kk) = (a(row, k) + shift) * q[col];
      blk(0, kk) = w[k] * (a(row, k) - a(row, 0)) * q[col];
    }
    blk(0, 0) = mean;
  };
  linalg::BlockTridiagonal sys(nx, nv);
  for (std::size_t j = 0; j < nx; ++j) {
    const double s = coeff.sigma_cell[j] / eps2;
    assemble(sys.diag[j], dk, j, j, s, s * theta[j]);
    if (j > 0) assemble(sys.lower[j], lo, j, j - 1, 0.0, 0.0);
    if (j + 1 < nx) assemble(sys.upper[j], up, j, j + 1, 0.0, 0.0);
    rhs(j, 0) = mean_rhs[j] + s * theta[j] * gap[j];
  }

  PredictionOutput out;
  Array2D y;
  try {
    y = linalg::block_thomas_solve(sys, rhs);
  } catch (const SingularSystemError& e) {
    throw SingularSystemError("prediction system singular at cell " + std::to_string(e.index()),
                              e.index());
  }
  out.even = Array2D(nx, nv);
  out.u.resize(nx);
  for (std::size_t j = 0; j < nx; ++j) {
    double d0 = 0.0;
    for (std::size_t k = 1; k < nv; ++k) {
      out.even(j, k) = state.even(j, k) + (y(j, 0) + q[j] * y(j, k));
      d0 -= w[k] / w[0] * q[j] * y(j, k);
    }
    out.even(j, 0) = state.even(j, 0) + (y(j, 0) + d0);
    out.u[j] = state.u[j] + ub[j] * (y(j, 0) - gap[j]);
  }
  out.odd = Array2D(nx + 1, nv);
  for (std::size_t k = 0; k < nv; ++k) {
    for (std::size_t n = 1; n < nx; ++n) {
      out.odd(n, k) = g(n, k) + p(n, k) * (out.even(n, k) - out.even(n - 1, k));
    }
    out.odd(0, k) = (2.0 / eps) * (setup.boundary.left[k] - out.even(0, k)) - out.odd(1, k);
    out.odd(nx, k) =
        (2.0 / eps) * (out.even(nx - 1, k) - setup.boundary.right[k]) - out.odd(nx - 1, k);
  }
  if (!all_finite(out.even.flat()) || !all_finite(out.odd.flat()) || !all_finite(out.u)) {
    throw InstabilityError("prediction produced non-finite values");
  }
  return out;
}

PredictionOutput predict(const TransportState& state, double dt, const TransportSetup& setup) {
  if (is_temperature_dependent(setup.opacity)) {
    throw std::invalid_argument("predict requires temperature-independent opacity");
  }
  return solve_prediction(state, dt, setup, prediction_coefficients(state, setup));
}

PredictionOutput predict_nlopacity(const TransportState& state, double dt,
                                   const TransportSetup& setup) {
  if (!is_temperature_dependent(setup.opacity)) {
    throw std::invalid_argument("predict_nlopacity requires temperature-dependent opacity");
  }
  return solve_prediction(state, dt, setup, prediction_coefficients(state, setup));
}

TemperatureUpdate correct_temperature(const TransportState& state, const PredictionOutput& pred,
                                      double dt, const TransportSetup& setup) {
  check_inputs(state, dt, setup);
  const std::vector<double> sigma = opacity_at_centers(setup.opacity, setup.grid);
  const std::vector<double> ones(setup.grid.nx(), 1.0);
  return solve_temperature(state, pred, dt, setup, sigma, ones);
}

TemperatureUpdate correct_temperature_nlopacity(const TransportState& state,
                                                const PredictionOutput& pred, double dt,
                                                const TransportSetup& setup) {
  check_inputs(state, dt, setup);
  const std::vector<double> sigma = opacity_at_centers(setup.opacity, setup.grid);
  std::vector<double> k_star(setup.grid.nx());
  for (std::size_t j = 0; j < k_star.size(); ++j) {
    k_star[j] = std::pow(std::max(pred.u[j], 0.0), 0.75);
  }
  return solve_temperature(state, pred, dt, setup, sigma, k_star);
}

FluctuationOutput correct_fluctuation(const TransportState& state, const PredictionOutput& /*pred*/,
                                      std::span<const double> t_new, double dt,
                                      const TransportSetup& setup) {
  check_inputs(state, dt, setup);
  const std::vector<double> sigma = opacity_at_centers(setup.opacity, setup.grid);
  const std::vector<double> sigma_n = opacity_at_nodes(sigma);
  const std::vector<double> ones_c(setup.grid.nx(), 1.0);
  const std::vector<double> ones_n(setup.grid.nx() + 1, 1.0);
  return solve_fluctuation(state, t_new, dt, setup, sigma, sigma_n, ones_c, ones_n);
}

FluctuationOutput correct_fluctuation_nlopacity(const TransportState& state,
                                                const PredictionOutput& /*pred*/,
                                                std::span<const double> t_new, double dt,
                                                const TransportSetup& setup) {
  check_inputs(state, dt, setup);
  const LinearCoefficients c = nonlinear_fluctuation_coefficients(t_new, setup);
  return solve_fluctuation(state, t_new, dt, setup, c.sigma_cell, c.sigma_node, c.k_cell,
                           c.k_node);
}

TransportState project(const TransportState& state, std::span<const double> t_new,
                       const FluctuationOutput& fluct, double dt, const TransportSetup& setup) {
  const std::size_t nx = setup.grid.nx();
  const std::size_t nv = setup.quad.size();
  const auto& kc = setup.constants;
  const double eps = kc.epsilon;
  const double ac = kc.a * kc.c;
  TransportState next;
  next.temperature.assign(t_new.begin(), t_new.end());
  next.u.resize(nx);
  for (std::size_t j = 0; j < nx; ++j) next.u[j] = pow4(next.temperature[j]);
  next.even = Array2D(nx, nv);
  next.odd = Array2D(nx + 1, nv);
  for (std::size_t j = 0; j < nx; ++j) {
    for (std::size_t k = 0; k < nv; ++k) next.even(j, k) = ac * next.u[j] + eps * fluct.even(j, k);
  }
  for (std::size_t k = 0; k < nv; ++k) {
    for (std::size_t n = 1; n < nx; ++n) next.odd(n, k) = fluct.odd(n, k);
    next.odd(0, k) = (2.0 / eps) * (setup.boundary.left[k] - next.even(0, k)) - next.odd(1, k);
    next.odd(nx, k) =
        (2.0 / eps) * (next.even(nx - 1, k) - setup.boundary.right[k]) - next.odd(nx - 1, k);
  }
  next.time = state.time + dt;
  return next;
}

TransportStepResult ap_step(const TransportState& state, double dt, const TransportSetup& setup) {
  const PredictionOutput pred = predict(state, dt, setup);
  const TemperatureUpdate tu = correct_temperature(state, pred, dt, setup);
  const FluctuationOutput fl = correct_fluctuation(state, pred, tu.temperature, dt, setup);
  const TransportState next = project(state, tu.temperature, fl, dt, setup);
  return finish_step(state, next, pred, tu, dt, setup, true);
}

TransportStepResult ap_step_nlopacity(const TransportState& state, double dt,
                                      const TransportSetup& setup) {
  const PredictionOutput pred = predict_nlopacity(state, dt, setup);
  const TemperatureUpdate tu = correct_temperature_nlopacity(state, pred, dt, setup);
  const FluctuationOutput fl = correct_fluctuation_nlopacity(state, pred, tu.temperature, dt, setup);
  const TransportState next = project(state, tu.temperature, fl, dt, setup);
  return finish_step(state, next, pred, tu, dt, setup, false);
}

std::vector<double> energy_balance_residual(const TransportState& state_n,
                                            const TransportState& state_np1,
                                            const PredictionOutput& pred, double dt,
                                            const TransportSetup& setup) {
  const std::size_t nx = setup.grid.nx();
  const std::size_t nv = setup.quad.size();
  const auto& kc = setup.constants;
  const double eps2 = kc.epsilon * kc.epsilon;
  const double dx = setup.grid.dx();
  const std::vector<double> sigma = opacity_at_centers(setup.opacity, setup.grid);
  const std::vector<double> rho_n = density(state_n, setup.quad);
  const std::vector<double> rho_np1 = density(state_np1, setup.quad);
  std::vector<double> r(nx);
  for (std::size_t j = 0; j < nx; ++j) {
    double flux_star = 0.0;
    double flux_gap = 0.0;
    for (std::size_t k = 0; k < nv; ++k) {
      const double wv = setup.quad.weights[k] * setup.quad.nodes[k];
      const double d_star = pred.odd(j + 1, k) - pred.odd(j, k);
      const double d_new = state_np1.odd(j + 1, k) - state_np1.odd(j, k);
      flux_star += wv * d_star;
      flux_gap += wv * (d_star - d_new);
    }
    const double coef = eps2 / (kc.c * sigma[j] * dt + eps2);
    r[j] = (rho_np1[j] - rho_n[j]) / (kc.c * dt) +
           kc.cv * (state_np1.temperature[j] - state_n.temperature[j]) / dt + flux_star / dx -
           coef * flux_gap / dx;
  }
  return r;
}

double boundary_energy_inflow(const Array2D& odd, const AngularQuadrature& quad) {
  const std::size_t last = odd.rows() - 1;
  double s = 0.0;
  for (std::size_t k = 0; k < quad.size(); ++k) {
    s += quad.weights[k] * quad.nodes[k] * (odd(0, k) - odd(last, k));
  }
  return s;
}

}  // namespace radtrans::transport
