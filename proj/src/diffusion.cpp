#include "radtrans/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "radtrans/errors.hpp"

namespace radtrans::diffusion {

namespace {

double pow4(double t) {
  const double t2 = t * t;
  return t2 * t2;
}

std::optional<double> dirichlet_temperature(const DiffusionBoundarySide& side) {
  if (const auto* d = std::get_if<Dirichlet>(&side)) return d->temperature;
  return std::nullopt;
}

// Face coefficients kappa on the nx+1 nodes plus the ghost values used at
// Dirichlet ends. A ZeroFlux end carries no boundary flux.
struct FaceOperator {
  std::vector<double> kappa;
  std::optional<double> left_ghost;
  std::optional<double> right_ghost;
  double inv_dx2 = 0.0;

  // (1/dx^2) [kappa_{j+1}(w_{j+1} - w_j) - kappa_j (w_j - w_{j-1})]
  std::vector<double> divergence(std::span<const double> w) const {
    const std::size_t nx = w.size();
    std::vector<double> out(nx);
    for (std::size_t j = 0; j < nx; ++j) {
      double right = 0.0;
      double left = 0.0;
      if (j + 1 < nx) {
        right = kappa[j + 1] * (w[j + 1] - w[j]);
      } else if (right_ghost) {
        right = kappa[nx] * (*right_ghost - w[j]);
      }
      if (j > 0) {
        left = kappa[j] * (w[j] - w[j - 1]);
      } else if (left_ghost) {
        left = kappa[0] * (w[j] - *left_ghost);
      }
      out[j] = (right - left) * inv_dx2;
    }
    return out;
  }

  double left_face(std::size_t nx) const { return (nx > 0 && left_ghost) ? kappa[0] : 0.0; }
  double right_face(std::size_t nx) const { return right_ghost ? kappa[nx] : 0.0; }
};

std::vector<double> sigma_centers(const DiffusionSetup& setup) {
  std::vector<double> sigma = opacity_at_centers(setup.opacity, setup.grid);
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    if (!(sigma[j] > 0.0)) {
      throw std::invalid_argument("diffusion solvers need sigma > 0 (cell " +
                                  std::to_string(j) + ")");
    }
  }
  return sigma;
}

void check_step(const DiffusionState& state, double dt, const DiffusionSetup& setup) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be > 0");
  if (state.temperature.size() != setup.grid.nx() || state.u.size() != setup.grid.nx()) {
    throw std::invalid_argument("diffusion state does not match the grid");
  }
}

// kappa = a c / (D sigma) at nodes from the node-averaged opacity.
FaceOperator constant_opacity_faces(const DiffusionSetup& setup, double ghost_power) {
  const auto& k = setup.constants;
  const std::vector<double> sigma_n = opacity_at_nodes(sigma_centers(setup));
  FaceOperator op;
  op.kappa.resize(sigma_n.size());
  for (std::size_t i = 0; i < sigma_n.size(); ++i) op.kappa[i] = k.a * k.c / (k.dd * sigma_n[i]);
  op.inv_dx2 = 1.0 / (setup.grid.dx() * setup.grid.dx());
  if (auto tl = dirichlet_temperature(setup.boundary.left)) op.left_ghost = std::pow(*tl, ghost_power);
  if (auto tr = dirichlet_temperature(setup.boundary.right)) op.right_ghost = std::pow(*tr, ghost_power);
  return op;
}

// kappa = face mean of a c T^3 / (D sigma_base). At a Dirichlet end the
// boundary face averages the adjacent cell with the ghost value.
FaceOperator cubic_faces(const DiffusionSetup& setup, std::span<const double> temperature) {
  const auto& k = setup.constants;
  const std::vector<double> sigma = sigma_centers(setup);
  const std::size_t nx = sigma.size();
  std::vector<double> q(nx);
  for (std::size_t j = 0; j < nx; ++j) {
    const double t = std::max(temperature[j], 0.0);
    q[j] = k.a * k.c * t * t * t / (k.dd * sigma[j]);
  }
  FaceOperator op;
  op.kappa = opacity_at_nodes(q);
  op.inv_dx2 = 1.0 / (setup.grid.dx() * setup.grid.dx());
  if (auto tl = dirichlet_temperature(setup.boundary.left)) {
    op.left_ghost = pow4(*tl);
    op.kappa[0] = 0.5 * (q[0] + k.a * k.c * (*tl) * (*tl) * (*tl) / (k.dd * sigma[0]));
  }
  if (auto tr = dirichlet_temperature(setup.boundary.right)) {
    op.right_ghost = pow4(*tr);
    op.kappa[nx] = 0.5 * (q[nx - 1] + k.a * k.c * (*tr) * (*tr) * (*tr) / (k.dd * sigma[nx - 1]));
  }
  return op;
}

// Solves (I - dt diag(m) L) U* = U^n.
std::vector<double> solve_prediction(const DiffusionState& state, double dt,
                                     const DiffusionSetup& setup, const FaceOperator& op) {
  const std::size_t nx = setup.grid.nx();
  const auto& k = setup.constants;
  linalg::Tridiagonal sys(nx);
  std::vector<double> rhs(nx);
  for (std::size_t j = 0; j < nx; ++j) {
    const double t = state.temperature[j];
    const double t3 = t * t * t;
    const double mobility = 4.0 * t3 / (4.0 * k.a * t3 + k.cv);
    const double s = dt * mobility * op.inv_dx2;
    const double kl = j > 0 ? op.kappa[j] : op.left_face(nx);
    const double kr = j + 1 < nx ? op.kappa[j + 1] : op.right_face(nx);
    sys.diag[j] = 1.0 + s * (kl + kr);
    if (j > 0) sys.lower[j] = -s * op.kappa[j];
    if (j + 1 < nx) sys.upper[j] = -s * op.kappa[j + 1];
    rhs[j] = state.u[j];
    if (j == 0 && op.left_ghost) rhs[j] += s * kl * *op.left_ghost;
    if (j + 1 == nx && op.right_ghost) rhs[j] += s * kr * *op.right_ghost;
  }
  return linalg::thomas_solve(sys, rhs);
}

// Per-cell quartic a T^4/dt + C_v T/dt = a (T^n)^4/dt + C_v T^n/dt + flux_j.
DiffusionStepResult correct_and_project(const DiffusionState& state, double dt,
                                        const DiffusionSetup& setup,
                                        std::span<const double> flux_divergence) {
  const std::size_t nx = setup.grid.nx();
  const auto& k = setup.constants;
  DiffusionStepResult out;
  out.state.temperature.resize(nx);
  out.state.u.resize(nx);
  const double alpha = k.a / dt;
  const double beta = k.cv / dt;
  for (std::size_t j = 0; j < nx; ++j) {
    const double tn = state.temperature[j];
    const double gamma = alpha * state.u[j] + beta * tn + flux_divergence[j];
    const auto root = linalg::newton_quartic(alpha, beta, gamma, tn, setup.tolerances.newton,
                                             setup.tolerances.max_newton_iterations);
    out.state.temperature[j] = root.value;
    out.state.u[j] = pow4(root.value);
    out.diagnostics.newton_iterations_max =
        std::max(out.diagnostics.newton_iterations_max, root.iterations);
    if (root.clamped) ++out.diagnostics.clamped_cells;
  }
  out.state.time = state.time + dt;
  summarize_temperature(out.state.temperature, out.diagnostics);
  return out;
}

void require_constant_opacity(const DiffusionSetup& setup, const char* who) {
  if (is_temperature_dependent(setup.opacity)) {
    throw std::invalid_argument(std::string(who) + " requires temperature-independent opacity");
  }
}

void require_nonlinear_opacity(const DiffusionSetup& setup, const char* who) {
  if (!is_temperature_dependent(setup.opacity)) {
    throw std::invalid_argument(std::string(who) + " requires temperature-dependent opacity");
  }
}

// Face operator for the implicit references: kappa on T^4 (constant opacity)
// or on T^7 with reciprocal-averaged opacity.
FaceOperator implicit_faces(const DiffusionSetup& setup, bool t7_flux) {
  if (!t7_flux) return constant_opacity_faces(setup, 4.0);
  const auto& k = setup.constants;
  const std::vector<double> sigma = sigma_centers(setup);
  std::vector<double> inv(sigma.size());
  for (std::size_t j = 0; j < sigma.size(); ++j) inv[j] = 1.0 / sigma[j];
  FaceOperator op;
  op.kappa = opacity_at_nodes(inv);
  const double pre = 4.0 * k.a * k.c / (7.0 * k.dd);
  for (double& v : op.kappa) v *= pre;
  op.inv_dx2 = 1.0 / (setup.grid.dx() * setup.grid.dx());
  if (auto tl = dirichlet_temperature(setup.boundary.left)) op.left_ghost = std::pow(*tl, 7.0);
  if (auto tr = dirichlet_temperature(setup.boundary.right)) op.right_ghost = std::pow(*tr, 7.0);
  return op;
}

DiffusionStepResult implicit_step(const DiffusionState& state, double dt,
                                  const DiffusionSetup& setup, bool t7_flux) {
  check_step(state, dt, setup);
  auto residual = [&](std::span<const double> t) {
    return implicit_residual(state, t, dt, setup, t7_flux);
  };
  auto jacobian = [&](std::span<const double> t) {
    return implicit_jacobian(t, dt, setup, t7_flux);
  };
  const auto sol = linalg::newton_tridiag_system(residual, jacobian, state.temperature,
                                                 setup.tolerances.newton,
                                                 setup.tolerances.max_newton_iterations, 0.0);
  DiffusionStepResult out;
  out.state.temperature = sol.x;
  out.state.u.resize(sol.x.size());
  for (std::size_t j = 0; j < sol.x.size(); ++j) out.state.u[j] = pow4(sol.x[j]);
  out.state.time = state.time + dt;
  out.diagnostics.newton_iterations_max = sol.iterations;
  summarize_temperature(out.state.temperature, out.diagnostics);
  return out;
}

}  // namespace

std::vector<double> predict_u(const DiffusionState& state, double dt, const DiffusionSetup& setup) {
  check_step(state, dt, setup);
  const FaceOperator op = is_temperature_dependent(setup.opacity)
                              ? cubic_faces(setup, state.temperature)
                              : constant_opacity_faces(setup, 4.0);
  return solve_prediction(state, dt, setup, op);
}

DiffusionStepResult diffusion3_step(const DiffusionState& state, double dt,
                                    const DiffusionSetup& setup) {
  require_constant_opacity(setup, "diffusion3_step");
  check_step(state, dt, setup);
  const FaceOperator op = constant_opacity_faces(setup, 4.0);
  const std::vector<double> u_star = solve_prediction(state, dt, setup, op);
  return correct_and_project(state, dt, setup, op.divergence(u_star));
}

DiffusionStepResult diffusion3_nlopacity_step(const DiffusionState& state, double dt,
                                              const DiffusionSetup& setup) {
  require_nonlinear_opacity(setup, "diffusion3_nlopacity_step");
  check_step(state, dt, setup);
  const FaceOperator pred_op = cubic_faces(setup, state.temperature);
  const std::vector<double> u_star = solve_prediction(state, dt, setup, pred_op);
  std::vector<double> t_star(u_star.size());
  for (std::size_t j = 0; j < u_star.size(); ++j) t_star[j] = std::pow(std::max(u_star[j], 0.0), 0.25);
  const FaceOperator corr_op = cubic_faces(setup, t_star);
  return correct_and_project(state, dt, setup, corr_op.divergence(u_star));
}

DiffusionStepResult diffusion2stage_step(const DiffusionState& state, double dt,
                                         const DiffusionSetup& setup) {
  check_step(state, dt, setup);
  const FaceOperator op = is_temperature_dependent(setup.opacity)
                              ? cubic_faces(setup, state.temperature)
                              : constant_opacity_faces(setup, 4.0);
  DiffusionStepResult out;
  out.state.u = solve_prediction(state, dt, setup, op);
  out.state.temperature.resize(out.state.u.size());
  for (std::size_t j = 0; j < out.state.u.size(); ++j) {
    out.state.temperature[j] = std::pow(std::max(out.state.u[j], 0.0), 0.25);
  }
  out.state.time = state.time + dt;
  summarize_temperature(out.state.temperature, out.diagnostics);
  return out;
}

DiffusionStepResult implicit_diffusion_step(const DiffusionState& state, double dt,
                                            const DiffusionSetup& setup) {
  require_constant_opacity(setup, "implicit_diffusion_step");
  return implicit_step(state, dt, setup, false);
}

DiffusionStepResult implicit_diffusion_T7_step(const DiffusionState& state, double dt,
                                               const DiffusionSetup& setup) {
  require_nonlinear_opacity(setup, "implicit_diffusion_T7_step");
  return implicit_step(state, dt, setup, true);
}

std::vector<double> implicit_residual(const DiffusionState& state, std::span<const double> t_new,
                                      double dt, const DiffusionSetup& setup, bool t7_flux) {
  const auto& k = setup.constants;
  const FaceOperator op = implicit_faces(setup, t7_flux);
  const std::size_t nx = t_new.size();
  std::vector<double> w(nx);
  for (std::size_t j = 0; j < nx; ++j) {
    w[j] = t7_flux ? std::pow(t_new[j], 7.0) : pow4(t_new[j]);
  }
  const std::vector<double> div = op.divergence(w);
  std::vector<double> r(nx);
  for (std::size_t j = 0; j < nx; ++j) {
    r[j] = k.a * (pow4(t_new[j]) - state.u[j]) + k.cv * (t_new[j] - state.temperature[j]) -
           dt * div[j];
  }
  return r;
}

linalg::Tridiagonal implicit_jacobian(std::span<const double> t_new, double dt,
                                      const DiffusionSetup& setup, bool t7_flux) {
  const auto& k = setup.constants;
  const FaceOperator op = implicit_faces(setup, t7_flux);
  const std::size_t nx = t_new.size();
  const double p = t7_flux ? 7.0 : 4.0;
  std::vector<double> dw(nx);
  for (std::size_t j = 0; j < nx; ++j) dw[j] = p * std::pow(t_new[j], p - 1.0);
  linalg::Tridiagonal jac(nx);
  const double s = dt * op.inv_dx2;
  for (std::size_t j = 0; j < nx; ++j) {
    const double t = t_new[j];
    const double kl = j > 0 ? op.kappa[j] : op.left_face(nx);
    const double kr = j + 1 < nx ? op.kappa[j + 1] : op.right_face(nx);
    jac.diag[j] = 4.0 * k.a * t * t * t + k.cv + s * (kl + kr) * dw[j];
    if (j > 0) jac.lower[j] = -s * op.kappa[j] * dw[j - 1];
    if (j + 1 < nx) jac.upper[j] = -s * op.kappa[j + 1] * dw[j + 1];
  }
  return jac;
}

}  // namespace radtrans::diffusion
