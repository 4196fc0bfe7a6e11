// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "radtrans/diffusion.hpp"
#include "radtrans/errors.hpp"
#include "radtrans/harness.hpp"
#include "radtrans/reference.hpp"
#include "radtrans/transport_ap.hpp"
#include "support/dense_oracle.hpp"
#include "support/test_util.hpp"

using namespace radtrans;
using harness::BoundarySide;
using harness::Field;
using harness::Norm;
using harness::RunResult;
using harness::SimulationConfig;
using harness::SolverKind;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, std::string note) {
    pass = pass && ok;
    notes.push_back((ok ? "" : "!! ") + std::move(note));
  }
};

BoundarySide vacuum() { return {BoundarySide::Kind::Vacuum, 0.0}; }
BoundarySide incoming(double v) { return {BoundarySide::Kind::Incoming, v}; }
BoundarySide temperature(double t) { return {BoundarySide::Kind::Temperature, t}; }

SimulationConfig base(SolverKind solver, std::size_t nx, double eps, OpacityModel opacity,
                      InitialCondition ic, double cfl, double tmax) {
  SimulationConfig c;
  c.solver = solver;
  c.nx = nx;
  c.nv = 16;
  c.epsilon = eps;
  c.cfl = cfl;
  c.tmax = tmax;
  c.opacity = std::move(opacity);
  c.ic = std::move(ic);
  c.bc = {vacuum(), vacuum()};
  return c;
}

OpacityModel inverse_cube(double sigma) { return TemperatureDependentOpacity{ConstantOpacity{sigma}}; }

/// Last cell whose temperature exceeds the threshold, or -1.
int front(const std::vector<double>& t, double threshold = 0.01) {
  int last = -1;
  for (std::size_t j = 0; j < t.size(); ++j) {
    if (t[j] > threshold) last = static_cast<int>(j);
  }
  return last;
}

bool nonincreasing(const std::vector<double>& t, double tol = 1e-12) {
  for (std::size_t j = 1; j < t.size(); ++j) {
    if (t[j] > t[j - 1] + tol) return false;
  }
  return true;
}

double l1(const std::vector<double>& a, const std::vector<double>& b, double dx) {
  return testutil::l1(a, b, dx);
}

// ---------------------------------------------------------------------------

Outcome uniform_accuracy() {
  Outcome o;
  const auto cfg = base(SolverKind::Ap, 25, 1.0, ConstantOpacity{1.0}, CompactParabola{}, 0.1, 0.1);
  // Errors are plotted at dx = 1/25 ... 1/400, each against its dx/2 partner.
  const std::vector<double> dx = {1.0 / 25, 1.0 / 50, 1.0 / 100, 1.0 / 200, 1.0 / 400, 1.0 / 800};
  const std::vector<double> eps = {1.0, 1e-3, 1e-5};
  const auto report = harness::convergence_study(cfg, dx, eps);
  for (const auto& s : report.series) {
    const bool ok = s.order_rho >= 0.8 && s.order_rho <= 1.2 && s.order_t >= 0.8 && s.order_t <= 1.2;
    std::string errs;
    for (const auto& r : s.rows) errs += fmt::format(" {:.3e}/{:.3e}", r.error_rho, r.error_t);
    o.check(ok, fmt::format("eps={:g}: p_rho={:.3f} p_T={:.3f} (err rho/T:{})", s.epsilon,
                            s.order_rho, s.order_t, errs));
  }
  return o;
}

Outcome limit_agreement() {
  Outcome o;
  const std::vector<std::pair<std::string, OpacityModel>> cases = {
      {"striped", StripedOpacity{1e-3}}, {"vanishing", VanishingPolyOpacity{}}};
  for (const auto& [name, op] : cases) {
    const auto ap = harness::run_simulation(base(SolverKind::Ap, 100, 1e-5, op, CompactParabola{}, 0.1, 0.1));
    const auto df =
        harness::run_simulation(base(SolverKind::Diffusion3, 100, 1e-5, op, CompactParabola{}, 0.1, 0.1));
    const double et = harness::compare_runs(ap, df, Field::T, Norm::L1);
    const double er = harness::compare_runs(ap, df, Field::Rho, Norm::L1);
    o.check(ap.stable && et <= 1e-2 && er <= 1e-2,
            fmt::format("{}: L1(T)={:.3e} L1(rho - acU)={:.3e} (tol 1e-2)", name, et, er));
  }
  return o;
}

Outcome kinetic_agreement() {
  Outcome o;
  const std::vector<std::tuple<std::string, OpacityModel, double>> cases = {
      {"striped t=0.8", StripedOpacity{1e-3}, 0.8}, {"vanishing t=0.3", VanishingPolyOpacity{}, 0.3}};
  for (const auto& [name, op, t] : cases) {
    const auto ap = harness::run_simulation(base(SolverKind::Ap, 100, 1.0, op, CompactParabola{}, 0.1, t));
    const auto ex = harness::run_simulation(
        base(SolverKind::ExplicitTransport, 200, 1.0, op, CompactParabola{}, 0.1, t));
    const double et = harness::compare_runs(ap, ex, Field::T, Norm::L1);
    const double er = harness::compare_runs(ap, ex, Field::Rho, Norm::L1);
    o.check(ap.stable && ex.stable && et <= 5e-2 && er <= 5e-2,
            fmt::format("{}: L1(T)={:.3e} L1(rho)={:.3e} (tol 5e-2)", name, et, er));
  }
  return o;
}

std::string cell_text(const harness::StabilityCell& c) {
  return c.largest_stable_c ? fmt::format("{:g}", *c.largest_stable_c) : std::string("none");
}

Outcome stability_tables() {
  Outcome o;
  {
    const auto cfg = base(SolverKind::Ap, 50, 1e-3, ConstantOpacity{1.0}, CompactParabola{}, 0.5, 1.0);
    const std::vector<double> eps = {1e-3, 1e-5};
    const std::vector<double> dx = {1.0 / 50, 1.0 / 100, 1.0 / 200, 1.0 / 400};
    const std::vector<double> cand = {0.5};
    const auto rep = harness::stability_sweep(cfg, eps, dx, cand);
    bool ok = true;
    std::string cells;
    for (const auto& c : rep.cells) {
      ok = ok && c.largest_stable_c && *c.largest_stable_c >= 0.5;
      cells += fmt::format(" ({:g},1/{:g}):{}", c.epsilon, 1.0 / c.dx, cell_text(c));
    }
    o.check(ok, "(a) sigma=1, C=0.5 stable:" + cells);
  }
  {
    const auto cfg = base(SolverKind::ApNlopacity, 100, 1.0, inverse_cube(1.0), CompactParabola{}, 6.0, 1.0);
    const auto run = harness::run_simulation(cfg);
    o.check(run.stable, fmt::format("(b) sigma/T^3, eps=1, dx=1/100, C=6: {} after {} steps",
                                    run.stable ? "stable" : "unstable", run.steps));
  }
  {
    auto cfg = base(SolverKind::ApNlopacity, 25, 1e-3, inverse_cube(1.0), FlatIntensity{1e-16}, 0.1, 0.5);
    cfg.bc = {incoming(1.0), vacuum()};
    const std::vector<double> eps = {1e-3};
    const std::vector<double> dx = {1.0 / 25, 1.0 / 50, 1.0 / 100};
    const std::vector<double> cand = {0.03, 0.06, 0.1, 0.3, 0.5, 1.0, 2.0, 4.0, 8.0};
    const auto rep = harness::stability_sweep(cfg, eps, dx, cand);
    bool ok = true;
    double prev = HUGE_VAL;
    std::string cells;
    for (const auto& c : rep.cells) {
      const double v = c.largest_stable_c.value_or(0.0);
      ok = ok && v <= prev;
      prev = v;
      cells += fmt::format(" 1/{:g}:{}", 1.0 / c.dx, cell_text(c));
    }
    o.check(ok, "(c) Marshak eps=1e-3, largest stable C nonincreasing in 1/dx:" + cells +
                    fmt::format(" (candidates up to {:g})", cand.back()));
  }
  return o;
}

Outcome front_capturing() {
  Outcome o;
  const std::vector<double> times = {0.1, 0.3, 0.6, 1.0, 1.5};
  auto ap = base(SolverKind::ApNlopacity, 100, 1e-5, inverse_cube(1.0), FlatIntensity{1e-16}, 0.1, 1.5);
  ap.bc = {incoming(1.0), vacuum()};
  ap.snapshots = times;
  auto ref = ap;
  ref.solver = SolverKind::ImplicitDiffusionT7;
  ref.cfl = 0.02;
  const auto a = harness::run_simulation(ap);
  const auto r = harness::run_simulation(ref);
  o.check(a.stable && r.stable && a.snapshots.size() == times.size() &&
              r.snapshots.size() == times.size(),
          "both runs stable with all output times");
  if (a.snapshots.size() != times.size() || r.snapshots.size() != times.size()) return o;
  int prev = -1;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const int fa = front(a.snapshots[i].temperature);
    const int fr = front(r.snapshots[i].temperature);
    const bool mono = nonincreasing(a.snapshots[i].temperature) && nonincreasing(r.snapshots[i].temperature);
    o.check(std::abs(fa - fr) <= 2 && mono && fa > prev,
            fmt::format("t={:g}: front AP cell {} vs T7 cell {}, monotone={}", times[i], fa, fr, mono));
    prev = fa;
  }
  return o;
}

Outcome negative_control() {
  Outcome o;
  const Grid1D grid(0.0, 1.0, 100);
  PhysicalConstants k;
  const diffusion::DiffusionSetup setup{grid, k, ConstantOpacity{1.0}, DiffusionBoundary{}, Tolerances{}};
  const auto support = [](const std::vector<double>& t) {
    std::vector<bool> s(t.size());
    for (std::size_t j = 0; j < t.size(); ++j) s[j] = t[j] > 1e-12;
    return s;
  };
  const double dt = 0.1 * grid.dx();
  auto two = init_diffusion_state(CompactParabola{}, grid, k);
  auto three = two;
  const auto s0 = support(two.temperature);
  const auto count = [](const std::vector<bool>& s) { return std::count(s.begin(), s.end(), true); };
  bool frozen = true;
  for (int n = 0; n < 200; ++n) {
    two = diffusion::diffusion2stage_step(two, dt, setup).state;
    three = diffusion::diffusion3_step(three, dt, setup).state;
    frozen = frozen && support(two.temperature) == s0;
  }
  const auto c0 = count(s0), c3 = count(support(three.temperature));
  o.check(frozen, fmt::format("two-stage support frozen at {} cells over 200 steps", c0));
  o.check(c3 > c0, fmt::format("three-stage support grew {} -> {} cells", c0, c3));
  return o;
}

// Criterion 7 helpers.

double max_change(const TransportState& a, const TransportState& b) {
  return std::max({testutil::max_abs_diff(a.even.flat(), b.even.flat()),
                   testutil::max_abs_diff(a.odd.flat(), b.odd.flat()),
                   testutil::max_abs_diff(a.temperature, b.temperature),
                   testutil::max_abs_diff(a.u, b.u)});
}

TransportState reflect(const TransportState& s) {
  const std::size_t nx = s.temperature.size(), nv = s.even.cols();
  TransportState r = s;
  for (std::size_t j = 0; j < nx; ++j) {
    r.temperature[j] = s.temperature[nx - 1 - j];
    r.u[j] = s.u[nx - 1 - j];
    for (std::size_t q = 0; q < nv; ++q) r.even(j, q) = s.even(nx - 1 - j, q);
  }
  for (std::size_t i = 0; i <= nx; ++i) {
    for (std::size_t q = 0; q < nv; ++q) r.odd(i, q) = -s.odd(nx - i, q);
  }
  return r;
}

std::vector<double> random_sigma(std::mt19937_64& rng, std::size_t nx) {
  std::uniform_real_distribution<double> u(0.1, 2.0);
  std::vector<double> s(nx);
  for (double& v : s) v = u(rng);
  return s;
}

Outcome structural_invariants() {
  Outcome o;
  const double t0 = 0.8;
  const std::size_t nx = 40, nv = 8;
  const double dt = 0.002;

  // Equilibrium drift, transport solvers.
  double worst_transport = 0.0;
  for (double eps : {1.0, 1e-3, 1e-5}) {
    for (bool nonlinear : {false, true}) {
      OpacityModel op = StripedOpacity{0.2};
      if (nonlinear) op = TemperatureDependentOpacity{StripedOpacity{0.2}};
      const auto probe = testutil::setup(nx, nv, eps, op);
      auto s = init_transport_state(UniformTemperature{t0}, probe.grid, probe.quad, probe.constants);
      const double b = s.even(0, 0);
      const auto setup = testutil::setup(nx, nv, eps, op, b, b);
      for (int n = 0; n < 50; ++n) {
        auto next = nonlinear ? transport::ap_step_nlopacity(s, dt, setup).state
                              : transport::ap_step(s, dt, setup).state;
        worst_transport = std::max(worst_transport, max_change(next, s));
        s = std::move(next);
      }
      if (nonlinear) {
        auto p = init_transport_state(UniformTemperature{t0}, probe.grid, probe.quad, probe.constants);
        for (int n = 0; n < 10; ++n) {
          auto next = reference::iterative_implicit_step(p, dt, setup, 1e-12, 50).state;
          worst_transport = std::max(worst_transport, max_change(next, p));
          p = std::move(next);
        }
      } else if (eps == 1.0) {
        // The explicit reference resolves eps^2 / (c sigma); kinetic regime only.
        auto e = reference::init_angular_state(UniformTemperature{t0}, probe.grid, probe.quad, probe.constants);
        for (int n = 0; n < 50; ++n) {
          auto next = reference::explicit_transport_step(e, dt, setup);
          worst_transport = std::max({worst_transport,
                                      testutil::max_abs_diff(next.plus.flat(), e.plus.flat()),
                                      testutil::max_abs_diff(next.minus.flat(), e.minus.flat()),
                                      testutil::max_abs_diff(next.temperature, e.temperature)});
          e = std::move(next);
        }
      }
    }
  }

  // Equilibrium drift and U = T^4, diffusion solvers.
  double worst_diffusion = 0.0;
  bool u_exact = true;
  const Grid1D grid(0.0, 1.0, nx);
  PhysicalConstants k;
  const DiffusionBoundary dirichlet{Dirichlet{t0}, Dirichlet{t0}};
  using Step = std::function<diffusion::DiffusionStepResult(const DiffusionState&, double,
                                                             const diffusion::DiffusionSetup&)>;
  const std::vector<std::pair<Step, OpacityModel>> solvers = {
      {diffusion::diffusion3_step, StripedOpacity{0.2}},
      {diffusion::diffusion3_nlopacity_step, TemperatureDependentOpacity{StripedOpacity{0.2}}},
      {diffusion::diffusion2stage_step, StripedOpacity{0.2}},
      {diffusion::implicit_diffusion_step, StripedOpacity{0.2}},
      {diffusion::implicit_diffusion_T7_step, TemperatureDependentOpacity{StripedOpacity{0.2}}}};
  for (const auto& [step, op] : solvers) {
    const diffusion::DiffusionSetup setup{grid, k, op, dirichlet, Tolerances{}};
    auto s = init_diffusion_state(UniformTemperature{t0}, grid, k);
    for (int n = 0; n < 50; ++n) {
      auto next = step(s, dt, setup).state;
      worst_diffusion = std::max({worst_diffusion, testutil::max_abs_diff(next.temperature, s.temperature),
                                  testutil::max_abs_diff(next.u, s.u)});
      s = std::move(next);
    }
  }
  {
    const diffusion::DiffusionSetup setup{grid, k, ConstantOpacity{1.0}, DiffusionBoundary{}, Tolerances{}};
    const diffusion::DiffusionSetup nl{grid, k, inverse_cube(1.0), DiffusionBoundary{}, Tolerances{}};
    auto a = init_diffusion_state(CompactParabola{}, grid, k);
    auto b = a;
    for (int n = 0; n < 50; ++n) {
      a = diffusion::diffusion3_step(a, dt, setup).state;
      b = diffusion::diffusion3_nlopacity_step(b, dt, nl).state;
      for (const auto* st : {&a, &b}) {
        for (std::size_t j = 0; j < nx; ++j) {
          const double t2 = st->temperature[j] * st->temperature[j];
          u_exact = u_exact && st->u[j] == t2 * t2;
        }
      }
    }
  }
  o.check(worst_transport <= 1e-13,
          fmt::format("transport equilibrium drift {:.2e} per step (tol 1e-13)", worst_transport));
  o.check(worst_diffusion <= 1e-13,
          fmt::format("diffusion equilibrium drift {:.2e} per step (tol 1e-13)", worst_diffusion));

  // U = T^4 after AP projection; mirror symmetry; interior energy balance.
  std::mt19937_64 rng(2024);
  double worst_mirror = 0.0, worst_balance = 0.0, worst_sensitivity = 0.0;
  for (bool nonlinear : {false, true}) {
    for (double eps : {1.0, 1e-2, 1e-5}) {
      const std::size_t mx = 24, mv = 6;
      auto sigma = random_sigma(rng, mx);
      auto sigma_r = sigma;
      std::reverse(sigma_r.begin(), sigma_r.end());
      OpacityModel op = TabulatedOpacity{sigma}, op_r = TabulatedOpacity{sigma_r};
      if (nonlinear) {
        op = TemperatureDependentOpacity{TabulatedOpacity{sigma}};
        op_r = TemperatureDependentOpacity{TabulatedOpacity{sigma_r}};
      }
      const auto setup = testutil::setup(mx, mv, eps, op, 0.9, 0.2);
      const auto setup_r = testutil::setup(mx, mv, eps, op_r, 0.2, 0.9);
      const auto s = testutil::random_state(rng, mx, mv, setup.constants);
      const auto step = [&](const TransportState& st, const transport::TransportSetup& su) {
        return nonlinear ? transport::ap_step_nlopacity(st, 0.01, su).state
                         : transport::ap_step(st, 0.01, su).state;
      };
      const auto a = step(s, setup);
      // Relative to the field magnitude: the odd part scales like 1/eps.
      double size = 1.0;
      for (double v : a.odd.flat()) size = std::max(size, std::abs(v));
      for (double v : a.even.flat()) size = std::max(size, std::abs(v));
      worst_mirror = std::max(worst_mirror, max_change(reflect(a), step(reflect(s), setup_r)) / size);
      // Conditioning floor: the same step after a one-ulp relative perturbation of the input.
      auto perturbed = s;
      std::uniform_real_distribution<double> ulp(-1.0, 1.0);
      for (double& v : perturbed.even.flat()) v *= 1.0 + 1.1e-16 * ulp(rng);
      for (double& v : perturbed.odd.flat()) v *= 1.0 + 1.1e-16 * ulp(rng);
      worst_sensitivity = std::max(worst_sensitivity, max_change(a, step(perturbed, setup)) / size);
      for (std::size_t j = 0; j < mx; ++j) {
        const double t2 = a.temperature[j] * a.temperature[j];
        u_exact = u_exact && a.u[j] == t2 * t2;
      }
      if (!nonlinear) {
        const auto pred = transport::predict(s, 0.01, setup);
        const auto res = transport::energy_balance_residual(s, a, pred, 0.01, setup);
        const double maxt = *std::max_element(a.temperature.begin(), a.temperature.end());
        const double scale = std::max(setup.constants.cv * maxt / 0.01, 1.0);
        for (std::size_t j = 1; j + 1 < mx; ++j) worst_balance = std::max(worst_balance, std::abs(res[j]) / scale);
      }
    }
  }
  o.check(u_exact, "U == T^4 bitwise after every projection");
  o.check(worst_mirror <= 1e-11,
          fmt::format("mirror commutation {:.2e} relative to field size (tol 1e-11)", worst_mirror));
  o.notes.push_back(fmt::format("one-ulp input perturbation moves the step by {:.2e} relative (conditioning floor)",
                                 worst_sensitivity));
  o.check(worst_balance <= 1e-10,
          fmt::format("interior energy-balance residual {:.2e} relative (round-off, tol 1e-10)", worst_balance));
  return o;
}

Outcome oracle_equivalence() {
  Outcome o;
  const double eps_list[] = {1.0, 0.3, 1e-2, 1e-3};
  double worst[2] = {0.0, 0.0};
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed) + 7000);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t nx = 2 + static_cast<std::size_t>(seed) % 7;
    const std::size_t nv = 1 + static_cast<std::size_t>(seed / 7) % 4;
    const double eps = eps_list[seed % 4];
    const double dt = 0.01 + 0.2 * unit(rng);
    const auto sigma = random_sigma(rng, nx);
    const double bl = unit(rng), br = unit(rng);
    for (int f = 0; f < 2; ++f) {
      const bool nonlinear = f == 1;
      OpacityModel op = TabulatedOpacity{sigma};
      if (nonlinear) op = TemperatureDependentOpacity{TabulatedOpacity{sigma}};
      const auto setup = testutil::setup(nx, nv, eps, op, bl, br);
      const auto s = testutil::random_state(rng, nx, nv, setup.constants);
      const auto pred = nonlinear ? transport::predict_nlopacity(s, dt, setup) : transport::predict(s, dt, setup);
      const auto ref = oracle::dense_prediction(s, dt, setup, oracle::prediction_multipliers(s, nonlinear));
      std::vector<double> t_new(nx);
      for (double& t : t_new) t = 0.4 + unit(rng);
      const auto fl = nonlinear ? transport::correct_fluctuation_nlopacity(s, pred, t_new, dt, setup)
                                : transport::correct_fluctuation(s, pred, t_new, dt, setup);
      const auto fref =
          oracle::dense_fluctuation(s, t_new, dt, setup, oracle::fluctuation_multipliers(t_new, nonlinear));
      worst[f] = std::max({worst[f], oracle::rel_diff(pred.even.flat(), ref.even.flat()),
                           oracle::rel_diff(pred.odd.flat(), ref.odd.flat()), oracle::rel_diff(pred.u, ref.u),
                           oracle::rel_diff(fl.even.flat(), fref.even.flat()),
                           oracle::rel_diff(fl.odd.flat(), fref.odd.flat())});
    }
  }
  o.check(worst[0] <= 1e-10, fmt::format("constant family: worst relative difference {:.2e}", worst[0]));
  o.check(worst[1] <= 1e-10, fmt::format("sigma/T^3 family: worst relative difference {:.2e}", worst[1]));
  return o;
}

Outcome marshak_units() {
  Outcome o;
  const std::vector<double> times = {0.02, 0.04, 0.06, 0.08, 0.1};  // ns
  std::vector<RunResult> runs;
  for (double dt : {1.6e-3, 8e-4, 4e-4}) {
    auto cfg = base(SolverKind::ApNlopacity, 100, 1.0, inverse_cube(300.0),
                    TanhTemperature{0.0024, 1000.0, 1.0}, 0.1, 0.1);
    cfg.x_max = 0.02;
    cfg.dt = dt;
    cfg.constants.a = 0.01372;
    cfg.constants.c = 29.98;
    cfg.constants.cv = 0.3;
    cfg.bc = {temperature(1.0), vacuum()};
    cfg.snapshots = {times.begin(), times.end() - 1};
    runs.push_back(harness::run_simulation(cfg));
    const auto& r = runs.back();
    std::string fronts;
    bool advancing = r.stable;
    int prev = -1;
    std::vector<std::vector<double>> profiles;
    for (const auto& s : r.snapshots) profiles.push_back(s.temperature);
    profiles.push_back(r.temperature);
    for (const auto& p : profiles) {
      const int f = front(p);
      advancing = advancing && f > prev;
      prev = f;
      fronts += fmt::format(" {}", f);
    }
    o.check(advancing, fmt::format("dt={:g} ns: {}, front cells{}", dt, r.stable ? "stable" : "unstable", fronts));
  }
  const double dx = 0.02 / 100;
  const double coarse = l1(runs[0].temperature, runs[1].temperature, dx);
  const double fine = l1(runs[1].temperature, runs[2].temperature, dx);
  o.check(fine <= coarse, fmt::format("L1(T) 1.6e-3 vs 8e-4: {:.3e}; 8e-4 vs 4e-4: {:.3e}", coarse, fine));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"uniform first-order accuracy", uniform_accuracy},
      {"diffusion-limit agreement", limit_agreement},
      {"kinetic-regime agreement", kinetic_agreement},
      {"stability tables", stability_tables},
      {"front capturing", front_capturing},
      {"negative control", negative_control},
      {"structural invariants", structural_invariants},
      {"oracle equivalence", oracle_equivalence},
      {"Marshak wave with units", marshak_units},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failed;
    fmt::print("criterion {} {}: {}\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL");
    for (const auto& n : o.notes) fmt::print("    {}\n", n);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
