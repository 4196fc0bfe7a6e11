#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>

#include <fmt/format.h>

#include "internal.hpp"
#include "radtrans/errors.hpp"
#include "radtrans/harness.hpp"
#include "radtrans/reference.hpp"

namespace radtrans::harness {

namespace {

struct Fields {
  std::vector<double> temperature;
  std::vector<double> u;
  std::vector<double> rho;
};

class Integrator {
 public:
  virtual ~Integrator() = default;
  virtual StepDiagnostics step(double dt) = 0;
  virtual Fields fields() const = 0;
};

transport::TransportSetup make_transport_setup(const SimulationConfig& c) {
  return transport::TransportSetup{c.grid(), build_quadrature(c.nv), c.physical_constants(),
                                   c.opacity, transport_boundary(c), c.tolerances};
}

class ParityIntegrator final : public Integrator {
 public:
  explicit ParityIntegrator(const SimulationConfig& c)
      : kind_(c.solver), setup_(make_transport_setup(c)) {
    state_ = init_transport_state(c.ic, setup_.grid, setup_.quad, setup_.constants);
  }

  StepDiagnostics step(double dt) override {
    if (kind_ == SolverKind::IterativeImplicit) {
      auto r = reference::iterative_implicit_step(state_, dt, setup_, setup_.tolerances.fixed_point,
                                                  setup_.tolerances.max_fixed_point_iterations);
      state_ = std::move(r.state);
      StepDiagnostics d;
      d.newton_iterations_max = r.iterations;
      d.energy_residual_max = NAN;
      summarize_temperature(state_.temperature, d);
      return d;
    }
    auto r = kind_ == SolverKind::Ap ? transport::ap_step(state_, dt, setup_)
                                     : transport::ap_step_nlopacity(state_, dt, setup_);
    state_ = std::move(r.state);
    return r.diagnostics;
  }

  Fields fields() const override {
    return {state_.temperature, state_.u, density(state_, setup_.quad)};
  }

 private:
  SolverKind kind_;
  transport::TransportSetup setup_;
  TransportState state_;
};

class ExplicitIntegrator final : public Integrator {
 public:
  explicit ExplicitIntegrator(const SimulationConfig& c) : setup_(make_transport_setup(c)) {
    state_ = reference::init_angular_state(c.ic, setup_.grid, setup_.quad, setup_.constants);
  }

  StepDiagnostics step(double dt) override {
    state_ = reference::explicit_transport_step(state_, dt, setup_);
    StepDiagnostics d;
    d.energy_residual_max = NAN;
    summarize_temperature(state_.temperature, d);
    return d;
  }

  Fields fields() const override {
    Fields f;
    f.temperature = state_.temperature;
    f.u.resize(f.temperature.size());
    for (std::size_t j = 0; j < f.u.size(); ++j) f.u[j] = std::pow(f.temperature[j], 4.0);
    f.rho = reference::angular_density(state_, setup_.quad);
    return f;
  }

 private:
  transport::TransportSetup setup_;
  reference::AngularIntensityState state_;
};

class DiffusionIntegrator final : public Integrator {
 public:
  using StepFn = diffusion::DiffusionStepResult (*)(const DiffusionState&, double,
                                                    const diffusion::DiffusionSetup&);

  DiffusionIntegrator(const SimulationConfig& c, StepFn fn)
      : fn_(fn),
        setup_{c.grid(), c.physical_constants(), c.opacity, diffusion_boundary(c), c.tolerances} {
    state_ = init_diffusion_state(c.ic, setup_.grid, setup_.constants);
  }

  StepDiagnostics step(double dt) override {
    auto r = fn_(state_, dt, setup_);
    state_ = std::move(r.state);
    r.diagnostics.energy_residual_max = NAN;
    return r.diagnostics;
  }

  Fields fields() const override {
    const double ac = setup_.constants.a * setup_.constants.c;
    Fields f{state_.temperature, state_.u, state_.u};
    for (double& v : f.rho) v *= ac;
    return f;
  }

 private:
  StepFn fn_;
  diffusion::DiffusionSetup setup_;
  DiffusionState state_;
};

std::unique_ptr<Integrator> make_integrator(const SimulationConfig& c) {
  switch (c.solver) {
    case SolverKind::Ap:
    case SolverKind::ApNlopacity:
    case SolverKind::IterativeImplicit:
      return std::make_unique<ParityIntegrator>(c);
    case SolverKind::ExplicitTransport:
      return std::make_unique<ExplicitIntegrator>(c);
    case SolverKind::Diffusion3:
      return std::make_unique<DiffusionIntegrator>(c, &diffusion::diffusion3_step);
    case SolverKind::Diffusion3Nlopacity:
      return std::make_unique<DiffusionIntegrator>(c, &diffusion::diffusion3_nlopacity_step);
    case SolverKind::Diffusion2Stage:
      return std::make_unique<DiffusionIntegrator>(c, &diffusion::diffusion2stage_step);
    case SolverKind::ImplicitDiffusion:
      return std::make_unique<DiffusionIntegrator>(c, &diffusion::implicit_diffusion_step);
    case SolverKind::ImplicitDiffusionT7:
      return std::make_unique<DiffusionIntegrator>(c, &diffusion::implicit_diffusion_T7_step);
  }
  throw ConfigError("solver", "unsupported solver");
}

bool finite_fields(const Fields& f) {
  return all_finite(f.temperature) && all_finite(f.u) && all_finite(f.rho);
}

}  // namespace

RunResult run_simulation(const SimulationConfig& config) {
  validate_config(config);
  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  result.config = config;
  result.x = config.grid().centers();

  auto integrator = make_integrator(config);
  const Fields initial = integrator->fields();
  double reference_t = boundary_temperature_bound(config);
  for (double t : initial.temperature) reference_t = std::max(reference_t, t);
  const double bound = config.blowup_factor * (reference_t > 0.0 ? reference_t : 1.0);

  std::vector<double> snapshots = config.snapshots;
  std::sort(snapshots.begin(), snapshots.end());
  snapshots.erase(std::unique(snapshots.begin(), snapshots.end()), snapshots.end());
  std::vector<double> targets = snapshots;
  if (targets.empty() || targets.back() < config.tmax) targets.push_back(config.tmax);

  const double dt = config.time_step();
  const double slack = 1e-12 * dt;
  double t = 0.0;
  std::size_t step = 0;
  for (double target : targets) {
    while (target - t > slack) {
      const double remaining = target - t;
      const bool landing = remaining <= dt + slack;
      const double h = landing ? remaining : dt;
      StepDiagnostics d;
      try {
        d = integrator->step(h);
      } catch (const SolverError& e) {
        throw SolverError(fmt::format("step {} at t = {:.17g}: {}", step + 1, t, e.what()));
      }
      t = landing ? target : t + h;
      ++step;
      const Fields f = integrator->fields();
      if (!finite_fields(f) || !(d.max_t <= bound)) d.stable = false;
      result.diagnostics.push_back({step, t, d});
      if (!d.stable) {
        result.stable = false;
        break;
      }
    }
    if (!result.stable) break;
    if (std::binary_search(snapshots.begin(), snapshots.end(), target)) {
      const Fields f = integrator->fields();
      result.snapshots.push_back({target, f.temperature, f.u, f.rho});
    }
  }

  const Fields f = integrator->fields();
  result.temperature = f.temperature;
  result.u = f.u;
  result.rho = f.rho;
  result.final_time = t;
  result.steps = step;
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace radtrans::harness
