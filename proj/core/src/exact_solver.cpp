#include "rbctl/exact_solver.hpp"

#include <sstream>

#include "rbctl/errors.hpp"

namespace rbctl {

CgResult solve_final_adjoint(const ProblemInstance& inst, const Vec& rhs,
                             const ExactSolverOptions& opts) {
  const int max_iter =
      opts.max_iter > 0 ? opts.max_iter : 10 * static_cast<int>(inst.state_dim());
  const LinearOperator op = [&inst](const Vec& p) { return apply_system_operator(inst, p); };
  return cg_solve(op, rhs, inst.ip(), opts.cg_tol, max_iter, opts.reorthogonalize);
}

ExactSolution solve_exact(const ProblemInstance& inst, const ExactSolverOptions& opts) {
  const Vec rhs = rhs_vector(inst);
  CgResult cg = solve_final_adjoint(inst, rhs, opts);
  Trajectory control = control_from_adjoint(inst, solve_adjoint_backward(inst, cg.solution));
  Trajectory state = solve_state_forward(inst, inst.x0(), &control);
  return ExactSolution{std::move(cg.solution), std::move(control), std::move(state),
                       cg.iterations, cg.residual_norm};
}

double error_estimator(const ProblemInstance& inst, const Vec& p,
                       const std::optional<Vec>& precomputed_rhs) {
  if (p.size() != inst.state_dim()) throw DimensionError("error_estimator: wrong length");
  const Vec residual =
      (precomputed_rhs ? *precomputed_rhs : rhs_vector(inst)) - apply_system_operator(inst, p);
  return normw(residual, inst.ip());
}

Mat assemble_dense_operator(const ProblemInstance& inst) {
  const Eigen::Index n = inst.state_dim();
  if (n > 64) {
    std::ostringstream msg;
    msg << "assemble_dense_operator: n = " << n << " exceeds the oracle limit of 64";
    throw DimensionError(msg.str());
  }
  Mat out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out.col(j) = apply_system_operator(inst, Vec::Unit(n, j));
  }
  return out;
}

}  // namespace rbctl
