#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "radtrans/errors.hpp"
#include "radtrans/reference.hpp"
#include "support/dense_oracle.hpp"
#include "support/test_util.hpp"

using namespace radtrans;
using namespace radtrans::reference;

namespace {

double total_energy(const AngularIntensityState& s, const transport::TransportSetup& setup) {
  const auto rho = angular_density(s, setup.quad);
  double e = 0.0;
  for (std::size_t j = 0; j < rho.size(); ++j) {
    e += (rho[j] / setup.constants.c + setup.constants.cv * s.temperature[j]) * setup.grid.dx();
  }
  return e;
}

double bump(double x) {
  const double r = (x - 0.3) / 0.1;
  return std::abs(r) < 1.0 ? std::pow(std::cos(0.5 * M_PI * r), 2) : 0.0;
}

double advection_error(std::size_t nx) {
  auto setup = testutil::setup(nx, 1, 1.0, ConstantOpacity{0.0});
  AngularIntensityState s;
  s.plus = Array2D(nx, 1);
  s.minus = Array2D(nx, 1);
  s.temperature.assign(nx, 1.0);
  const auto xc = setup.grid.centers();
  for (std::size_t j = 0; j < nx; ++j) s.plus(j, 0) = bump(xc[j]);
  const double speed = setup.quad.nodes[0];  // c v / eps with c = eps = 1
  const double dt = 0.5 * setup.grid.dx() / speed;
  const double tmax = 0.4;
  const auto steps = static_cast<std::size_t>(std::lround(tmax / dt));
  for (std::size_t n = 0; n < steps; ++n) s = explicit_transport_step(s, dt, setup);
  double err = 0.0;
  for (std::size_t j = 0; j < nx; ++j) {
    err += std::abs(s.plus(j, 0) - bump(xc[j] - speed * tmax)) * setup.grid.dx();
    CHECK(s.minus(j, 0) == 0.0);
  }
  return err;
}

}  // namespace

TEST_CASE("explicit solver keeps equilibrium") {
  const auto probe = testutil::setup(30, 8, 0.5, StripedOpacity{0.2});
  auto s = init_angular_state(UniformTemperature{0.8}, probe.grid, probe.quad, probe.constants);
  const double b = s.plus(0, 0);
  const auto setup = testutil::setup(30, 8, 0.5, StripedOpacity{0.2}, b, b);
  const auto s0 = s;
  for (int n = 0; n < 50; ++n) s = explicit_transport_step(s, 0.01, setup);
  CHECK(testutil::max_abs_diff(s.plus.flat(), s0.plus.flat()) <= 1e-14);
  CHECK(testutil::max_abs_diff(s.minus.flat(), s0.minus.flat()) <= 1e-14);
  CHECK(testutil::max_abs_diff(s.temperature, s0.temperature) <= 1e-14);
}

TEST_CASE("explicit solver conserves energy up to boundary fluxes") {
  for (double eps : {1.0, 0.1}) {
    const auto setup = testutil::setup(60, 8, eps, StripedOpacity{0.2}, 1.0, 0.3);
    auto s = init_angular_state(CompactParabola{}, setup.grid, setup.quad, setup.constants);
    for (int n = 0; n < 50; ++n) {
      const double dt = explicit_stable_dt(s, setup);
      const double before = total_energy(s, setup);
      const double inflow = explicit_boundary_inflow(s, setup);
      s = explicit_transport_step(s, dt, setup);
      CHECK(std::abs(total_energy(s, setup) - before - dt * inflow) <= 1e-10 * std::max(1.0, before));
    }
  }
}

TEST_CASE("explicit solver translates profiles at first order") {
  const double e1 = advection_error(100);
  const double e2 = advection_error(200);
  const double e3 = advection_error(400);
  CHECK(e2 < e1);
  CHECK(e3 < e2);
  const double p = std::log2(e2 / e3);
  CHECK(p > 0.6);
  CHECK(p < 1.3);
}

TEST_CASE("explicit solver sub-steps and rejects sigma/T^3") {
  const auto setup = testutil::setup(40, 4, 0.1, ConstantOpacity{1.0}, 1.0, 0.0);
  const auto s = init_angular_state(CompactParabola{}, setup.grid, setup.quad, setup.constants);
  const double h = explicit_stable_dt(s, setup);
  CHECK(h > 0.0);
  const auto big = explicit_transport_step(s, 25.0 * h, setup);
  CHECK(all_finite(big.plus.flat()));
  CHECK(big.time == doctest::Approx(25.0 * h));
  const auto nl = testutil::setup(40, 4, 0.1, TemperatureDependentOpacity{});
  CHECK_THROWS_AS(explicit_transport_step(s, h, nl), std::invalid_argument);
}

TEST_CASE("lagged-opacity iteration") {
  SUBCASE("equilibrium converges in one iteration") {
    const auto probe = testutil::setup(20, 4, 1.0, TemperatureDependentOpacity{});
    const auto s = init_transport_state(UniformTemperature{0.7}, probe.grid, probe.quad, probe.constants);
    const double b = s.even(0, 0);
    const auto setup = testutil::setup(20, 4, 1.0, TemperatureDependentOpacity{}, b, b);
    const auto r = iterative_implicit_step(s, 0.01, setup, 1e-12, 10);
    CHECK(r.iterations == 1);
    CHECK(testutil::max_abs_diff(r.state.u, s.u) <= 1e-14);
  }

  SUBCASE("converged iterate satisfies the frozen-coefficient system") {
    const auto setup = testutil::setup(50, 8, 1.0, TemperatureDependentOpacity{}, 1.0, 0.0);
    auto s = init_transport_state(FlatIntensity{1e-16}, setup.grid, setup.quad, setup.constants);
    const double dt = 0.002;
    for (int n = 0; n < 20; ++n) s = iterative_implicit_step(s, dt, setup, 1e-12, 200).state;
    const auto r = iterative_implicit_step(s, dt, setup, 1e-13, 200);
    oracle::Multipliers m = oracle::prediction_multipliers(s, true);
    for (std::size_t j = 0; j < 50; ++j) m.k_cell[j] = std::pow(std::max(r.state.u[j], 0.0), 0.75);
    m.k_node = opacity_at_nodes(m.k_cell);
    const auto ref = oracle::dense_prediction(s, dt, setup, m);
    CHECK(oracle::rel_diff(r.state.u, ref.u) <= 1e-10);
    CHECK(oracle::rel_diff(r.state.even.flat(), ref.even.flat()) <= 1e-10);

    // Contraction after the first two iterations.
    for (std::size_t i = 3; i < r.increments.size(); ++i) {
      CHECK(r.increments[i] <= r.increments[i - 1]);
    }
  }

  SUBCASE("hard regime fails loudly rather than silently") {
    const auto setup = testutil::setup(100, 16, 0.2, TemperatureDependentOpacity{}, 1.0, 0.0);
    auto s = init_transport_state(FlatIntensity{1e-16}, setup.grid, setup.quad, setup.constants);
    const double dt = 0.1 * setup.grid.dx();
    bool failed = false;
    for (int n = 0; n < 100 && !failed; ++n) {
      try {
        s = iterative_implicit_step(s, dt, setup, 1e-10, 30).state;
        CHECK(all_finite(s.u));
        CHECK(all_finite(s.even.flat()));
      } catch (const NonConvergenceError& e) {
        CHECK(std::isfinite(e.last_norm()));
        failed = true;
      } catch (const SolverError&) {
        failed = true;
      }
    }
  }

  SUBCASE("argument checks") {
    const auto setup = testutil::setup(10, 4, 1.0, ConstantOpacity{1.0});
    const auto s = init_transport_state(UniformTemperature{0.5}, setup.grid, setup.quad, setup.constants);
    CHECK_THROWS_AS(iterative_implicit_step(s, 0.01, setup, 1e-10, 5), std::invalid_argument);
    const auto nl = testutil::setup(10, 4, 1.0, TemperatureDependentOpacity{});
    CHECK_THROWS_AS(iterative_implicit_step(s, 0.01, nl, 0.0, 5), std::invalid_argument);
    const auto cold = testutil::setup(10, 4, 1.0, TemperatureDependentOpacity{}, 1.0, 0.0);
    CHECK_THROWS_AS(iterative_implicit_step(s, 0.01, cold, 1e-14, 1), NonConvergenceError);
  }
}
