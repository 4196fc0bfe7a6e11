#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace radtrans {

/// Base class for failures raised while advancing a solver.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A zero pivot or singular diagonal block; `index` is the row (scalar
/// systems) or spatial index (block systems) where elimination broke down.
class SingularSystemError : public SolverError {
 public:
  SingularSystemError(const std::string& what, std::size_t index)
      : SolverError(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// An iterative solve ran out of iterations. `last_norm` is the residual (or
/// increment) norm at the final iterate.
class NonConvergenceError : public SolverError {
 public:
  NonConvergenceError(const std::string& what, double last_norm)
      : SolverError(what), last_norm_(last_norm) {}
  double last_norm() const noexcept { return last_norm_; }

 private:
  double last_norm_;
};

/// A step produced non-finite values.
class InstabilityError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Invalid configuration. `key()` names the offending key (may be empty).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace radtrans
