#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rbctl {

/// Mismatched vector or matrix shapes passed to a public operation.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative method ran out of iterations. Carries the best iterate seen.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, Eigen::VectorXd best_iterate,
                   double residual_norm, int iterations)
      : std::runtime_error(what),
        best_iterate_(std::move(best_iterate)),
        residual_norm_(residual_norm),
        iterations_(iterations) {}

  const Eigen::VectorXd& best_iterate() const noexcept { return best_iterate_; }
  double residual_norm() const noexcept { return residual_norm_; }
  int iterations() const noexcept { return iterations_; }

 private:
  Eigen::VectorXd best_iterate_;
  double residual_norm_;
  int iterations_;
};

/// A direct factorization failed (singular or indefinite matrix).
class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reading or writing a persisted artifact failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rbctl
