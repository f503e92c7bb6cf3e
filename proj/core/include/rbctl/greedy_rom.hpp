#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rbctl/exact_solver.hpp"

namespace rbctl {

/// One pass of the greedy loop: the estimator sweep over the training set
/// with `basis_size` vectors, and what it selected.
struct GreedyRecord {
  int basis_size = 0;
  double max_estimate = 0.0;
  /// Max over the training set of the true adjoint error, if tracked.
  std::optional<double> max_true_error;
  /// Training index with the largest estimate (ties: smallest index).
  int selected_index = -1;
};

/// Orthonormal (in `ip`) final-time adjoint snapshots and their provenance.
struct ReducedBasis {
  std::string family;
  InnerProduct ip;
  std::vector<Vec> vectors;
  std::vector<Parameter> selected_params;
  std::vector<GreedyRecord> history;
  double tolerance_used = 0.0;

  int size() const { return static_cast<int>(vectors.size()); }
  Eigen::Index state_dim() const { return vectors.empty() ? 0 : vectors.front().size(); }
  /// sum_i coeffs_i * vectors_i
  Vec combine(const Vec& coeffs) const;
  /// Columns are the basis vectors.
  Mat matrix() const;
};

/// Parameters and their reduced coefficients for the final basis.
struct TrainingData {
  std::vector<Parameter> params;
  std::vector<Vec> coeffs;

  std::size_t size() const { return params.size(); }
  Eigen::Index param_dim() const { return params.empty() ? 0 : params.front().size(); }
  Eigen::Index basis_size() const { return coeffs.empty() ? 0 : coeffs.front().size(); }
  /// Rows are parameters / coefficient vectors.
  Mat inputs() const;
  Mat targets() const;
};

/// Coefficients of the residual-minimizing reduced adjoint together with
/// the data needed to certify it without another operator application.
struct Projection {
  Vec coeffs;
  /// (I + M Lambda) applied to each basis vector.
  std::vector<Vec> perturbed;
  Vec rhs;
};

struct ReducedSolution {
  Vec coeffs;
  Vec phiT_approx;
  Trajectory control;
  std::optional<double> estimated_error;
};

/// Minimizes normw(rhs - sum_i a_i x_i) over a via the normal equations.
Projection project_coefficients(const ProblemInstance& inst, const ReducedBasis& basis);

/// Solves gram * a = moments by Cholesky; retries once with a diagonal shift
/// of 1e-14 * trace / N. Throws FactorizationError naming N if both fail.
Vec solve_normal_equations(const Mat& gram, const Vec& moments);

/// normw(rhs - sum_i coeffs_i perturbed_i).
double cheap_estimator_from_cache(const Vec& coeffs, const std::vector<Vec>& perturbed,
                                  const Vec& rhs, const InnerProduct& ip);

/// Online reduced solve: project, combine, reconstruct the control.
ReducedSolution rom_online(const ProblemInstance& inst, const ReducedBasis& basis,
                           bool certify = true);

struct GreedyOptions {
  double tol = 1e-6;
  int max_basis = 50;
  ExactSolverOptions exact;
  /// Solve every training parameter exactly up front and report the true
  /// max error per iteration. Costs one exact solve per training point.
  bool track_true_errors = false;
  int threads = 1;
  /// Called after each estimator sweep.
  std::function<void(const GreedyRecord&)> on_record;
  /// Receives non-fatal warnings (rejected snapshots). Defaults to stderr.
  std::function<void(const std::string&)> warn;
};

struct GreedyResult {
  ReducedBasis basis;
  TrainingData data;
  /// Training indices whose snapshot was rejected as linearly dependent.
  std::vector<int> rejected;
  /// Exact final-time adjoints per training parameter, when tracked.
  std::vector<Vec> exact_adjoints;
};

/// Thrown when max_basis vectors were added without reaching tol.
class GreedyIncompleteError : public std::runtime_error {
 public:
  GreedyIncompleteError(const std::string& what, ReducedBasis partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const ReducedBasis& partial_basis() const noexcept { return partial_; }

 private:
  ReducedBasis partial_;
};

/// Weak greedy over `train_set` driven by the residual estimator.
GreedyResult greedy_offline(const ProblemFamily& family, const std::vector<Parameter>& train_set,
                            const GreedyOptions& opts = {});

}  // namespace rbctl
