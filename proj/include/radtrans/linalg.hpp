#pragma once

// Direct banded solvers and the Newton iterations shared by every scheme.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "radtrans/core.hpp"

namespace radtrans::linalg {

/// lower[0] and upper[n-1] are ignored.
struct Tridiagonal {
  std::vector<double> lower;
  std::vector<double> diag;
  std::vector<double> upper;

  Tridiagonal() = default;
  explicit Tridiagonal(std::size_t n) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
  std::size_t size() const noexcept { return diag.size(); }

  /// y = A x
  std::vector<double> apply(std::span<const double> x) const;
};

/// Thomas elimination without pivoting. Throws SingularSystemError naming the
/// row whose pivot fell below 1e-300 in magnitude.
std::vector<double> thomas_solve(const Tridiagonal& sys, std::span<const double> rhs);

/// Block tridiagonal matrix with n dense m x m blocks per block row.
/// lower[0] and upper[n-1] are unused.
struct BlockTridiagonal {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<Eigen::MatrixXd> lower;
  std::vector<Eigen::MatrixXd> diag;
  std::vector<Eigen::MatrixXd> upper;

  BlockTridiagonal() = default;
  BlockTridiagonal(std::size_t blocks, std::size_t block_size);

  /// y = A x with x, y stored as n rows of m entries.
  Array2D apply(const Array2D& x) const;
};

/// Block Thomas elimination with a partially pivoted LU of every eliminated
/// diagonal block. Throws SingularSystemError naming the spatial index of a
/// block whose reciprocal condition estimate drops below 1e-14.
Array2D block_thomas_solve(const BlockTridiagonal& sys, const Array2D& rhs);

struct QuarticRoot {
  double value = 0.0;
  int iterations = 0;
  bool clamped = false;  // gamma < 0, value forced to 0
};

/// Solves alpha T^4 + beta T = gamma for T >= 0 (alpha >= 0, beta > 0) by
/// safeguarded Newton. The residual on return satisfies
/// |alpha T^4 + beta T - gamma| <= tol * max(1, |gamma|). Negative gamma has
/// no nonnegative root: returns 0 with `clamped` set.
QuarticRoot newton_quartic(double alpha, double beta, double gamma, double t_init,
                           double tol = 1e-12, int max_iter = 100);

struct NewtonSystemResult {
  std::vector<double> x;
  int iterations = 0;
  double residual_norm = 0.0;
};

using ResidualFn = std::function<std::vector<double>(std::span<const double>)>;
using JacobianFn = std::function<Tridiagonal(std::span<const double>)>;

/// Damped Newton for F(x) = 0 with a tridiagonal Jacobian. The step is halved
/// while the residual max-norm grows, down to a damping of 1e-4. When
/// `lower_bound` is set, iterates are clipped to it. Throws
/// NonConvergenceError once max_iter updates fail to reach ||F||_inf <= tol.
NewtonSystemResult newton_tridiag_system(const ResidualFn& residual, const JacobianFn& jacobian,
                                         std::vector<double> x0, double tol, int max_iter,
                                         std::optional<double> lower_bound = std::nullopt);

double max_norm(std::span<const double> v) noexcept;

}  // namespace radtrans::linalg
