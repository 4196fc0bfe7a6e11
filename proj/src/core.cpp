#include "radtrans/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace radtrans {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

void PhysicalConstants::validate() const {
  if (!positive_finite(a)) throw std::invalid_argument("radiation constant a must be > 0");
  if (!positive_finite(c)) throw std::invalid_argument("light speed c must be > 0");
  if (!positive_finite(cv)) throw std::invalid_argument("heat capacity cv must be > 0");
  if (!positive_finite(epsilon)) throw std::invalid_argument("epsilon must be > 0");
  if (!positive_finite(dd)) throw std::invalid_argument("diffusion denominator dd must be > 0");
}

Grid1D::Grid1D(double x_min, double x_max, std::size_t nx)
    : x_min_(x_min), x_max_(x_max), nx_(nx), dx_(0.0) {
  if (nx == 0) throw std::invalid_argument("grid needs at least one cell");
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min)) {
    throw std::invalid_argument("grid requires finite x_min < x_max");
  }
  dx_ = (x_max - x_min) / static_cast<double>(nx);
}

std::vector<double> Grid1D::centers() const {
  std::vector<double> out(nx_);
  for (std::size_t j = 0; j < nx_; ++j) out[j] = center(j);
  return out;
}

std::vector<double> Grid1D::nodes() const {
  std::vector<double> out(nx_ + 1);
  for (std::size_t i = 0; i <= nx_; ++i) out[i] = node(i);
  return out;
}

AngularQuadrature build_quadrature(std::size_t nv) {
  if (nv == 0) throw std::invalid_argument("quadrature needs nv >= 1");
  AngularQuadrature q;
  q.nodes.resize(nv);
  q.weights.assign(nv, 1.0 / static_cast<double>(nv));
  for (std::size_t k = 0; k < nv; ++k) {
    q.nodes[k] = (static_cast<double>(k) + 0.5) / static_cast<double>(nv);
  }
  return q;
}

bool is_temperature_dependent(const OpacityModel& model) noexcept {
  return std::holds_alternative<TemperatureDependentOpacity>(model);
}

double evaluate_opacity(const SpatialOpacity& profile, double x) {
  return std::visit(
      overloaded{
          [](const ConstantOpacity& o) { return o.value; },
          [x](const StripedOpacity& o) {
            const bool stripe = (x >= 0.2 && x <= 0.35) || (x >= 0.65 && x <= 0.8);
            return stripe ? o.sigma0 : 1.0;
          },
          [x](const VanishingPolyOpacity&) {
            const double d = x - 1.0;
            return 10.0 * d * d * d * d + 1e-3;
          },
          [](const TabulatedOpacity&) -> double {
            throw std::invalid_argument("tabulated opacity has no pointwise evaluation");
          },
      },
      profile);
}

namespace {

std::vector<double> spatial_at_centers(const SpatialOpacity& profile, const Grid1D& grid) {
  if (const auto* tab = std::get_if<TabulatedOpacity>(&profile)) {
    if (tab->values.size() != grid.nx()) {
      throw std::invalid_argument("tabulated opacity has " + std::to_string(tab->values.size()) +
                                  " values for " + std::to_string(grid.nx()) + " cells");
    }
    return tab->values;
  }
  std::vector<double> out(grid.nx());
  for (std::size_t j = 0; j < grid.nx(); ++j) out[j] = evaluate_opacity(profile, grid.center(j));
  return out;
}

}  // namespace

std::vector<double> opacity_at_centers(const OpacityModel& model, const Grid1D& grid,
                                       std::span<const double> /*temperature*/) {
  std::vector<double> out = std::visit(
      overloaded{
          [&](const TemperatureDependentOpacity& o) { return spatial_at_centers(o.base, grid); },
          [&](const auto& o) { return spatial_at_centers(SpatialOpacity{o}, grid); },
      },
      model);
  for (double s : out) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("opacity must be >= 0");
  }
  return out;
}

std::vector<double> opacity_at_nodes(std::span<const double> center_values) {
  const std::size_t n = center_values.size();
  if (n == 0) throw std::invalid_argument("opacity_at_nodes needs at least one centre");
  std::vector<double> out(n + 1);
  out.front() = center_values.front();
  out.back() = center_values.back();
  for (std::size_t i = 1; i < n; ++i) out[i] = 0.5 * (center_values[i - 1] + center_values[i]);
  return out;
}

TransportBoundary TransportBoundary::isotropic(std::size_t nv, double left_value,
                                               double right_value) {
  if (left_value < 0.0 || right_value < 0.0) {
    throw std::invalid_argument("incoming intensities must be >= 0");
  }
  return {std::vector<double>(nv, left_value), std::vector<double>(nv, right_value)};
}

std::vector<double> initial_temperature(const InitialCondition& ic, const Grid1D& grid,
                                        const PhysicalConstants& constants) {
  const std::size_t nx = grid.nx();
  std::vector<double> t(nx);
  std::visit(overloaded{
                 [&](const CompactParabola&) {
                   for (std::size_t j = 0; j < nx; ++j) {
                     const double d = grid.center(j) - 0.5;
                     t[j] = std::max(1.0 - 40.0 * d * d, 0.0);
                   }
                 },
                 [&](const SineQuarterPower&) {
                   for (std::size_t j = 0; j < nx; ++j) {
                     const double s =
                         std::sin(2.0 * std::numbers::pi * (grid.center(j) - 0.25));
                     t[j] = std::pow(std::max(s, 0.0), 0.25);
                   }
                 },
                 [&](const FlatIntensity& f) {
                   if (f.value < 0.0) throw std::invalid_argument("flat intensity must be >= 0");
                   const double temp = f.temperature >= 0.0
                                           ? f.temperature
                                           : std::pow(f.value / (constants.a * constants.c), 0.25);
                   std::fill(t.begin(), t.end(), temp);
                 },
                 [&](const TanhTemperature& h) {
                   for (std::size_t j = 0; j < nx; ++j) {
                     t[j] = 0.5 * h.amplitude *
                            (1.0 - std::tanh((grid.center(j) - h.center) * h.steepness));
                   }
                 },
                 [&](const UniformTemperature& u) { std::fill(t.begin(), t.end(), u.temperature); },
                 [&](const CustomTemperature& c) {
                   if (c.temperature.size() != nx) {
                     throw std::invalid_argument("custom temperature length does not match grid");
                   }
                   t = c.temperature;
                 },
             },
             ic);
  for (double v : t) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("initial temperature must be finite and >= 0");
    }
  }
  return t;
}

TransportState init_transport_state(const InitialCondition& ic, const Grid1D& grid,
                                    const AngularQuadrature& quad,
                                    const PhysicalConstants& constants) {
  constants.validate();
  TransportState s;
  s.temperature = initial_temperature(ic, grid, constants);
  const std::size_t nx = grid.nx();
  const std::size_t nv = quad.size();
  s.u.resize(nx);
  for (std::size_t j = 0; j < nx; ++j) {
    const double t2 = s.temperature[j] * s.temperature[j];
    s.u[j] = t2 * t2;
  }
  s.even = Array2D(nx, nv);
  s.odd = Array2D(nx + 1, nv, 0.0);
  const double ac = constants.a * constants.c;
  const auto* flat = std::get_if<FlatIntensity>(&ic);
  for (std::size_t j = 0; j < nx; ++j) {
    const double e = flat ? flat->value : ac * s.u[j];
    for (std::size_t k = 0; k < nv; ++k) s.even(j, k) = e;
  }
  return s;
}

TransportState transport_state_from_intensity(const Array2D& plus, const Array2D& minus,
                                              std::span<const double> temperature,
                                              const PhysicalConstants& constants) {
  const std::size_t nx = plus.rows();
  const std::size_t nv = plus.cols();
  if (minus.rows() != nx || minus.cols() != nv || temperature.size() != nx || nx == 0) {
    throw std::invalid_argument("intensity arrays and temperature must share the grid");
  }
  TransportState s;
  s.even = Array2D(nx, nv);
  Array2D odd_c(nx, nv);
  for (std::size_t j = 0; j < nx; ++j) {
    for (std::size_t k = 0; k < nv; ++k) {
      if (plus(j, k) < 0.0 || minus(j, k) < 0.0) {
        throw std::invalid_argument("intensities must be >= 0");
      }
      s.even(j, k) = 0.5 * (plus(j, k) + minus(j, k));
      odd_c(j, k) = (plus(j, k) - minus(j, k)) / (2.0 * constants.epsilon);
    }
  }
  s.odd = Array2D(nx + 1, nv);
  for (std::size_t k = 0; k < nv; ++k) {
    s.odd(0, k) = odd_c(0, k);
    s.odd(nx, k) = odd_c(nx - 1, k);
    for (std::size_t i = 1; i < nx; ++i) s.odd(i, k) = 0.5 * (odd_c(i - 1, k) + odd_c(i, k));
  }
  s.temperature.assign(temperature.begin(), temperature.end());
  s.u.resize(nx);
  for (std::size_t j = 0; j < nx; ++j) {
    if (!(s.temperature[j] >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
    const double t2 = s.temperature[j] * s.temperature[j];
    s.u[j] = t2 * t2;
  }
  return s;
}

DiffusionState init_diffusion_state(const InitialCondition& ic, const Grid1D& grid,
                                    const PhysicalConstants& constants) {
  constants.validate();
  DiffusionState s;
  s.temperature = initial_temperature(ic, grid, constants);
  s.u.resize(s.temperature.size());
  for (std::size_t j = 0; j < s.u.size(); ++j) {
    const double t2 = s.temperature[j] * s.temperature[j];
    s.u[j] = t2 * t2;
  }
  return s;
}

std::vector<double> density(const TransportState& state, const AngularQuadrature& quad) {
  std::vector<double> rho(state.even.rows(), 0.0);
  for (std::size_t j = 0; j < rho.size(); ++j) {
    double sum = 0.0;
    for (std::size_t k = 0; k < quad.size(); ++k) sum += quad.weights[k] * state.even(j, k);
    rho[j] = sum;
  }
  return rho;
}

bool all_finite(std::span<const double> values) noexcept {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void summarize_temperature(std::span<const double> temperature, StepDiagnostics& diag) {
  if (temperature.empty()) return;
  const auto [lo, hi] = std::minmax_element(temperature.begin(), temperature.end());
  diag.min_t = *lo;
  diag.max_t = *hi;
  if (!all_finite(temperature)) diag.stable = false;
}

}  // namespace radtrans
