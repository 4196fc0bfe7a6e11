#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>

#include <fmt/format.h>

#include "radtrans/errors.hpp"
#include "radtrans/harness.hpp"

namespace radtrans::harness {

namespace {

std::size_t cells_for(const SimulationConfig& base, double dx) {
  const double length = base.x_max - base.x_min;
  const double n = std::round(length / dx);
  if (!(dx > 0.0) || n < 1.0 || std::abs(n * dx - length) > 1e-9 * length) {
    throw ConfigError("dx", fmt::format("dx = {:g} does not divide the domain", dx));
  }
  return static_cast<std::size_t>(n);
}

double l1_distance(std::span<const double> a, std::span<const double> b, double dx) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += std::abs(a[j] - b[j]);
  return s * dx;
}

}  // namespace

double fit_order(std::span<const double> dx, std::span<const double> error) {
  if (dx.size() != error.size() || dx.size() < 2) {
    throw std::invalid_argument("fit_order needs at least two (dx, error) pairs");
  }
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (!(dx[i] > 0.0) || !(error[i] > 0.0)) return NAN;
  }
  std::size_t first = 0;
  if (dx.size() >= 3) {
    std::vector<double> ratios;
    for (std::size_t i = 0; i + 1 < error.size(); ++i) ratios.push_back(error[i] / error[i + 1]);
    std::vector<double> sorted = ratios;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    const double median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    if (std::abs(ratios.front() - median) > 0.5 * median) first = 1;
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const auto n = static_cast<double>(dx.size() - first);
  for (std::size_t i = first; i < dx.size(); ++i) {
    const double x = std::log(dx[i]);
    const double y = std::log(error[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceReport convergence_study(const SimulationConfig& base, std::span<const double> dx_list,
                                    std::span<const double> epsilons) {
  if (dx_list.size() < 3) throw ConfigError("dx", "convergence needs at least three grid sizes");
  std::vector<std::size_t> cells;
  for (double dx : dx_list) cells.push_back(cells_for(base, dx));
  for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
    if (cells[i + 1] != 2 * cells[i]) throw ConfigError("dx", "each dx must halve the previous one");
  }

  std::vector<std::vector<std::future<RunResult>>> runs(epsilons.size());
  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    for (std::size_t nx : cells) {
      SimulationConfig cfg = base;
      cfg.epsilon = epsilons[e];
      cfg.nx = nx;
      cfg.dt.reset();
      cfg.snapshots.clear();
      runs[e].push_back(std::async(std::launch::async, [cfg] { return run_simulation(cfg); }));
    }
  }

  ConvergenceReport report;
  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    std::vector<RunResult> results;
    for (auto& f : runs[e]) results.push_back(f.get());
    ConvergenceSeries series;
    series.epsilon = epsilons[e];
    for (std::size_t i = 0; i + 1 < results.size(); ++i) {
      if (!results[i].stable || !results[i + 1].stable) {
        throw SolverError(fmt::format("convergence run unstable (epsilon = {:g}, nx = {})",
                                      epsilons[e], results[i].stable ? cells[i + 1] : cells[i]));
      }
      const double dx = (base.x_max - base.x_min) / static_cast<double>(cells[i]);
      ConvergenceRow row;
      row.dx = dx;
      row.error_rho = l1_distance(results[i].rho, restrict_pairs(results[i + 1].rho), dx);
      row.error_t = l1_distance(results[i].temperature, restrict_pairs(results[i + 1].temperature), dx);
      series.rows.push_back(row);
    }
    std::vector<double> dxs, er, et;
    for (const auto& r : series.rows) {
      dxs.push_back(r.dx);
      er.push_back(r.error_rho);
      et.push_back(r.error_t);
    }
    series.order_rho = fit_order(dxs, er);
    series.order_t = fit_order(dxs, et);
    report.series.push_back(std::move(series));
  }
  return report;
}

StabilityReport stability_sweep(const SimulationConfig& base, std::span<const double> epsilons,
                                std::span<const double> dx_list,
                                std::span<const double> candidates) {
  if (candidates.empty()) throw ConfigError("C", "no candidate constants");
  if (!std::is_sorted(candidates.begin(), candidates.end())) {
    throw ConfigError("C", "candidates must be sorted ascending");
  }
  for (double c : candidates) {
    if (!(c > 0.0)) throw ConfigError("C", "candidates must be > 0");
  }
  std::vector<std::future<StabilityCell>> cells;
  for (double eps : epsilons) {
    for (double dx : dx_list) {
      SimulationConfig cfg = base;
      cfg.epsilon = eps;
      cfg.nx = cells_for(base, dx);
      cfg.dt.reset();
      cfg.snapshots.clear();
      std::vector<double> cs(candidates.begin(), candidates.end());
      cells.push_back(std::async(std::launch::async, [cfg, cs, eps, dx]() mutable {
        StabilityCell cell{eps, dx, std::nullopt};
        for (double c : cs) {
          cfg.cfl = c;
          bool stable = false;
          try {
            stable = run_simulation(cfg).stable;
          } catch (const SolverError&) {
            stable = false;
          }
          if (!stable) break;
          cell.largest_stable_c = c;
        }
        return cell;
      }));
    }
  }
  StabilityReport report;
  report.criterion = stability_criterion(base);
  for (auto& f : cells) report.cells.push_back(f.get());
  return report;
}

}  // namespace radtrans::harness
