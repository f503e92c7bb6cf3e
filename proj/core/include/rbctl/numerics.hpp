#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace rbctl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Scaled Euclidean inner product <x, y>_w = w * x^T y on the state space.
/// The benchmark discretizations use w = h (mesh width).
struct InnerProduct {
  double weight = 1.0;

  explicit InnerProduct(double w = 1.0);
};

double dotw(const Vec& x, const Vec& y, const InnerProduct& ip);
double normw(const Vec& x, const InnerProduct& ip);

using LinearOperator = std::function<Vec(const Vec&)>;

struct CgResult {
  Vec solution;
  int iterations = 0;
  /// True residual norm ||b - A x||_w of the returned solution.
  double residual_norm = 0.0;
};

/// Conjugate gradients for an operator that is self-adjoint and positive
/// definite in `ip`. Terminates once the true weighted residual is <= tol.
/// Throws ConvergenceError (carrying the best iterate) after max_iter steps.
/// With `reorthogonalize`, each new residual is orthogonalized against all
/// previous ones; this costs O(n k) memory but restores the finite
/// termination that plain CG loses on badly conditioned operators.
CgResult cg_solve(const LinearOperator& apply, const Vec& b,
                  const InnerProduct& ip, double tol, int max_iter,
                  bool reorthogonalize = false);

/// Modified Gram-Schmidt with one re-orthogonalization pass.
/// Returns std::nullopt when the projected vector is shorter than
/// drop_tol * normw(v), i.e. v is numerically in the span of `basis`.
std::optional<Vec> gram_schmidt_extend(std::span<const Vec> basis, const Vec& v,
                                       const InnerProduct& ip,
                                       double drop_tol = 1e-10);

/// Composite trapezoidal rule on a uniform grid.
double trapezoid_quad(std::span<const double> values, double dt);

/// Singular values (descending) of [sqrt(w) c_1 | ... | sqrt(w) c_k]; their
/// squares are the eigenvalues of the ip-Gram matrix of the columns.
std::vector<double> svd_singular_values(std::span<const Vec> columns,
                                        const InnerProduct& ip);

}  // namespace rbctl
