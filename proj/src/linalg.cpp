#include "radtrans/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "radtrans/errors.hpp"

namespace radtrans::linalg {

double max_norm(std::span<const double> v) noexcept {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return std::isfinite(m) ? m : INFINITY;
}

std::vector<double> Tridiagonal::apply(std::span<const double> x) const {
  const std::size_t n = size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = diag[i] * x[i];
    if (i > 0) s += lower[i] * x[i - 1];
    if (i + 1 < n) s += upper[i] * x[i + 1];
    y[i] = s;
  }
  return y;
}

std::vector<double> thomas_solve(const Tridiagonal& sys, std::span<const double> rhs) {
  const std::size_t n = sys.size();
  if (n == 0 || rhs.size() != n || sys.lower.size() != n || sys.upper.size() != n) {
    throw std::invalid_argument("thomas_solve: inconsistent sizes");
  }
  std::vector<double> c(n), d(n);
  double pivot = sys.diag[0];
  if (!(std::abs(pivot) > 1e-300)) throw SingularSystemError("zero pivot at row 0", 0);
  c[0] = sys.upper[0] / pivot;
  d[0] = rhs[0] / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = sys.diag[i] - sys.lower[i] * c[i - 1];
    if (!(std::abs(pivot) > 1e-300)) {
      throw SingularSystemError("zero pivot at row " + std::to_string(i), i);
    }
    c[i] = (i + 1 < n) ? sys.upper[i] / pivot : 0.0;
    d[i] = (rhs[i] - sys.lower[i] * d[i - 1]) / pivot;
  }
  std::vector<double> x(n);
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

BlockTridiagonal::BlockTridiagonal(std::size_t blocks, std::size_t block_size)
    : n(blocks),
      m(block_size),
      lower(blocks, Eigen::MatrixXd::Zero(block_size, block_size)),
      diag(blocks, Eigen::MatrixXd::Zero(block_size, block_size)),
      upper(blocks, Eigen::MatrixXd::Zero(block_size, block_size)) {}

namespace {

Eigen::Map<const Eigen::VectorXd> row_view(const Array2D& a, std::size_t r) {
  return {a.row(r).data(), static_cast<Eigen::Index>(a.cols())};
}

}  // namespace

Array2D BlockTridiagonal::apply(const Array2D& x) const {
  Array2D y(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd s = diag[i] * row_view(x, i);
    if (i > 0) s += lower[i] * row_view(x, i - 1);
    if (i + 1 < n) s += upper[i] * row_view(x, i + 1);
    for (std::size_t k = 0; k < m; ++k) y(i, k) = s(static_cast<Eigen::Index>(k));
  }
  return y;
}

Array2D block_thomas_solve(const BlockTridiagonal& sys, const Array2D& rhs) {
  const std::size_t n = sys.n;
  const std::size_t m = sys.m;
  if (n == 0 || m == 0 || rhs.rows() != n || rhs.cols() != m || sys.diag.size() != n) {
    throw std::invalid_argument("block_thomas_solve: inconsistent sizes");
  }
  // Forward sweep: C_i = D'_i^{-1} U_i, y_i = D'_i^{-1}(r_i - L_i y_{i-1}),
  // with D'_i = D_i - L_i C_{i-1}.
  std::vector<Eigen::MatrixXd> c(n);
  std::vector<Eigen::VectorXd> y(n);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;

  auto factor = [&](std::size_t i, const Eigen::MatrixXd& block) {
    lu.compute(block);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-14)) {
      throw SingularSystemError(
          "singular diagonal block at spatial index " + std::to_string(i), i);
    }
  };

  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd r = row_view(rhs, i);
    if (i == 0) {
      factor(0, sys.diag[0]);
    } else {
      factor(i, sys.diag[i] - sys.lower[i] * c[i - 1]);
      r -= sys.lower[i] * y[i - 1];
    }
    y[i] = lu.solve(r);
    if (i + 1 < n) c[i] = lu.solve(sys.upper[i]);
  }

  Array2D x(n, m);
  Eigen::VectorXd next = y[n - 1];
  for (std::size_t k = 0; k < m; ++k) x(n - 1, k) = next(static_cast<Eigen::Index>(k));
  for (std::size_t i = n - 1; i-- > 0;) {
    Eigen::VectorXd cur = y[i] - c[i] * next;
    for (std::size_t k = 0; k < m; ++k) x(i, k) = cur(static_cast<Eigen::Index>(k));
    next = std::move(cur);
  }
  for (double v : x.flat()) {
    if (!std::isfinite(v)) throw SolverError("block_thomas_solve produced non-finite values");
  }
  return x;
}

QuarticRoot newton_quartic(double alpha, double beta, double gamma, double t_init, double tol,
                           int max_iter) {
  if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(gamma) ||
      !std::isfinite(t_init) || !std::isfinite(tol)) {
    throw std::invalid_argument("newton_quartic: non-finite input");
  }
  if (alpha < 0.0 || !(beta > 0.0)) {
    throw std::invalid_argument("newton_quartic: need alpha >= 0 and beta > 0");
  }
  QuarticRoot out;
  if (gamma < 0.0) {
    out.clamped = true;
    return out;
  }
  if (gamma == 0.0) return out;

  auto f = [&](double t) { return (alpha * t * t * t + beta) * t - gamma; };
  const double target = tol * std::max(1.0, gamma);

  // f(0) = -gamma < 0 and f(hi) >= 0, so [0, hi] brackets the root.
  double hi = gamma / beta;
  if (alpha > 0.0) hi = std::min(hi, std::pow(gamma / alpha, 0.25));
  double lo = 0.0;

  double t = std::clamp(t_init, 0.0, hi);
  if (t <= 0.0) t = 0.5 * hi;
  double ft = f(t);
  for (int it = 0; it < max_iter; ++it) {
    if (std::abs(ft) <= target) {
      out.value = t;
      return out;
    }
    if (ft < 0.0) lo = t; else hi = t;
    const double slope = 4.0 * alpha * t * t * t + beta;
    double next = t - ft / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    ++out.iterations;
    if (next == t || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      out.value = next;
      return out;
    }
    t = next;
    ft = f(t);
  }
  if (std::abs(ft) <= target) {
    out.value = t;
    return out;
  }
  throw NonConvergenceError("newton_quartic did not converge", std::abs(ft));
}

NewtonSystemResult newton_tridiag_system(const ResidualFn& residual, const JacobianFn& jacobian,
                                         std::vector<double> x0, double tol, int max_iter,
                                         std::optional<double> lower_bound) {
  NewtonSystemResult out;
  out.x = std::move(x0);
  auto clip = [&](std::vector<double>& x) {
    if (!lower_bound) return;
    for (double& v : x) v = std::max(v, *lower_bound);
  };
  clip(out.x);
  std::vector<double> r = residual(out.x);
  double norm = max_norm(r);
  while (norm > tol) {
    if (out.iterations >= max_iter) {
      throw NonConvergenceError("Newton iteration did not converge in " +
                                    std::to_string(max_iter) + " iterations",
                                norm);
    }
    std::vector<double> step = thomas_solve(jacobian(out.x), r);
    double theta = 1.0;
    std::vector<double> trial(out.x.size());
    std::vector<double> trial_r;
    double trial_norm = INFINITY;
    while (true) {
      for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = out.x[i] - theta * step[i];
      clip(trial);
      trial_r = residual(trial);
      trial_norm = max_norm(trial_r);
      if (trial_norm <= norm || theta <= 1e-4) break;
      theta *= 0.5;
    }
    out.x = std::move(trial);
    r = std::move(trial_r);
    norm = trial_norm;
    ++out.iterations;
  }
  out.residual_norm = norm;
  return out;
}

}  // namespace radtrans::linalg
