#include "radtrans/reference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "radtrans/errors.hpp"
#include "radtrans/linalg.hpp"

namespace radtrans::reference {

namespace {

double pow4(double t) {
  const double t2 = t * t;
  return t2 * t2;
}

void check_angular(const AngularIntensityState& state, const transport::TransportSetup& setup) {
  const std::size_t nx = setup.grid.nx();
  const std::size_t nv = setup.quad.size();
  if (state.plus.rows() != nx || state.plus.cols() != nv || state.minus.rows() != nx ||
      state.minus.cols() != nv || state.temperature.size() != nx) {
    throw std::invalid_argument("angular state does not match grid and quadrature");
  }
  if (setup.boundary.left.size() != nv || setup.boundary.right.size() != nv) {
    throw std::invalid_argument("boundary data must be sampled on every velocity node");
  }
  if (is_temperature_dependent(setup.opacity)) {
    throw std::invalid_argument("explicit transport does not support sigma/T^3 opacity");
  }
}

}  // namespace

AngularIntensityState init_angular_state(const InitialCondition& ic, const Grid1D& grid,
                                         const AngularQuadrature& quad,
                                         const PhysicalConstants& constants) {
  const TransportState parity = init_transport_state(ic, grid, quad, constants);
  AngularIntensityState s;
  s.plus = parity.even;
  s.minus = parity.even;
  s.temperature = parity.temperature;
  return s;
}

std::vector<double> angular_density(const AngularIntensityState& state,
                                    const AngularQuadrature& quad) {
  std::vector<double> rho(state.plus.rows(), 0.0);
  for (std::size_t j = 0; j < rho.size(); ++j) {
    for (std::size_t k = 0; k < quad.size(); ++k) {
      rho[j] += 0.5 * quad.weights[k] * (state.plus(j, k) + state.minus(j, k));
    }
  }
  return rho;
}

double explicit_stable_dt(const AngularIntensityState& state,
                          const transport::TransportSetup& setup) {
  const auto& kc = setup.constants;
  const double eps = kc.epsilon;
  const std::vector<double> sigma = opacity_at_centers(setup.opacity, setup.grid);
  const double sigma_max = sigma.empty() ? 0.0 : *std::max_element(sigma.begin(), sigma.end());
  double t_max = 0.0;
  for (double t : state.temperature) t_max = std::max(t_max, t);
  // Upwind transport plus relaxation of the intensities.
  double dt = 1.0 / (kc.c * (setup.quad.max_node() / (eps * setup.grid.dx()) +
                             sigma_max / (eps * eps)));
  // Material relaxation, linearised about the hottest cell.
  if (sigma_max > 0.0) {
    const double stiff = kc.c * sigma_max * std::max(1.0, 4.0 * kc.a * t_max * t_max * t_max);
    dt = std::min(dt, kc.cv * eps * eps / stiff);
    dt = std::min(dt, kc.cv * eps * eps / (4.0 * kc.a * kc.c * sigma_max *
                                           std::max(t_max * t_max * t_max, 1e-300)));
  }
  return 0.9 * dt;
}

AngularIntensityState explicit_transport_step(const AngularIntensityState& state, double dt,
                                              const transport::TransportSetup& setup) {
  check_angular(state, setup);
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be > 0");
  const std::size_t nx = setup.grid.nx();
  const std::size_t nv = setup.quad.size();
  const auto& kc = setup.constants;
  const double eps = kc.epsilon;
  const double ac = kc.a * kc.c;
  const double dx = setup.grid.dx();
  const std::vector<double> sigma = opacity_at_centers(setup.opacity, setup.grid);

  AngularIntensityState cur = state;
  AngularIntensityState next = state;
  double remaining = dt;
  while (remaining > 0.0) {
    const double limit = explicit_stable_dt(cur, setup);
    const auto substeps = static_cast<std::size_t>(std::ceil(remaining / limit));
    const double tau = remaining / static_cast<double>(std::max<std::size_t>(substeps, 1));
    for (std::size_t j = 0; j < nx; ++j) {
      const double planck = ac * pow4(cur.temperature[j]);
      const double relax = kc.c * tau * sigma[j] / (eps * eps);
      double absorbed = 0.0;
      for (std::size_t k = 0; k < nv; ++k) {
        const double nu = kc.c * tau * setup.quad.nodes[k] / (eps * dx);
        const double up_plus = j == 0 ? setup.boundary.left[k] : cur.plus(j - 1, k);
        const double up_minus = j + 1 == nx ? setup.boundary.right[k] : cur.minus(j + 1, k);
        const double ip = cur.plus(j, k);
        const double im = cur.minus(j, k);
        next.plus(j, k) = ip - nu * (ip - up_plus) + relax * (planck - ip);
        next.minus(j, k) = im - nu * (im - up_minus) + relax * (planck - im);
        absorbed += 0.5 * setup.quad.weights[k] * (ip + im - 2.0 * planck);
      }
      next.temperature[j] = cur.temperature[j] + tau * sigma[j] * absorbed / (eps * eps * kc.cv);
    }
    next.time = cur.time + tau;
    if (!all_finite(next.plus.flat()) || !all_finite(next.minus.flat()) ||
        !all_finite(next.temperature)) {
      throw InstabilityError("explicit transport produced non-finite values at t = " +
                             std::to_string(next.time));
    }
    // Forward Euler can undershoot zero by round-off in cold regions.
    for (double& t : next.temperature) t = std::max(t, 0.0);
    std::swap(cur, next);
    remaining -= tau;
    if (remaining < 1e-14 * dt) remaining = 0.0;
  }
  cur.time = state.time + dt;
  return cur;
}

double explicit_boundary_inflow(const AngularIntensityState& state,
                                const transport::TransportSetup& setup) {
  const std::size_t last = setup.grid.nx() - 1;
  double s = 0.0;
  for (std::size_t k = 0; k < setup.quad.size(); ++k) {
    s += 0.5 * setup.quad.weights[k] * setup.quad.nodes[k] *
         ((setup.boundary.left[k] - state.minus(0, k)) -
          (state.plus(last, k) - setup.boundary.right[k]));
  }
  return s / setup.constants.epsilon;
}

PicardResult iterative_implicit_step(const TransportState& state, double dt,
                                     const transport::TransportSetup& setup, double tol,
                                     int max_iter) {
  if (!is_temperature_dependent(setup.opacity)) {
    throw std::invalid_argument("iterative_implicit_step requires sigma/T^3 opacity");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  const std::size_t nx = setup.grid.nx();

  transport::LinearCoefficients coeff;
  coeff.sigma_cell = opacity_at_centers(setup.opacity, setup.grid);
  coeff.sigma_node = opacity_at_nodes(coeff.sigma_cell);
  coeff.u_coupling.assign(nx, 1.0);
  coeff.k_cell.resize(nx);

  PicardResult out;
  std::vector<double> u_k = state.u;
  for (int it = 1; it <= max_iter; ++it) {
    for (std::size_t j = 0; j < nx; ++j) coeff.k_cell[j] = std::pow(std::max(u_k[j], 0.0), 0.75);
    coeff.k_node = opacity_at_nodes(coeff.k_cell);
    const transport::PredictionOutput sol = transport::solve_prediction(state, dt, setup, coeff);

    double inc = 0.0;
    double scale = 1.0;
    for (std::size_t j = 0; j < nx; ++j) {
      inc = std::max(inc, std::abs(sol.u[j] - u_k[j]));
      scale = std::max(scale, std::abs(u_k[j]));
    }
    out.increments.push_back(inc);
    out.iterations = it;
    u_k = sol.u;
    if (inc <= tol * scale) {
      out.state.even = sol.even;
      out.state.odd = sol.odd;
      out.state.u = sol.u;
      out.state.temperature.resize(nx);
      for (std::size_t j = 0; j < nx; ++j) {
        out.state.temperature[j] = std::pow(std::max(sol.u[j], 0.0), 0.25);
      }
      out.state.time = state.time + dt;
      return out;
    }
  }
  throw NonConvergenceError("lagged-opacity iteration did not converge in " +
                                std::to_string(max_iter) + " iterations",
                            out.increments.empty() ? INFINITY : out.increments.back());
}

}  // namespace radtrans::reference
