#pragma once

#include <optional>

#include "rbctl/dynamics.hpp"

namespace rbctl {

/// Optimal final-time adjoint and the control/state it generates.
struct ExactSolution {
  Vec phiT;
  Trajectory control;
  Trajectory state;
  int cg_iters = 0;
  double residual_norm = 0.0;
};

struct ExactSolverOptions {
  double cg_tol = 1e-12;
  /// 0 selects 10 * state dimension.
  int max_iter = 0;
  bool reorthogonalize = true;
};

/// Solves (I + M Lambda) phiT = M (e^{AT} x0 - xT) by CG, then reconstructs
/// control and state. Throws ConvergenceError if CG fails.
ExactSolution solve_exact(const ProblemInstance& inst, const ExactSolverOptions& opts = {});

/// Final-time adjoint only; skips the reconstruction sweeps.
CgResult solve_final_adjoint(const ProblemInstance& inst, const Vec& rhs,
                             const ExactSolverOptions& opts = {});

/// Residual estimator normw(rhs - (I + M Lambda) p). Pass the right-hand side
/// when it is already known to save one forward sweep.
double error_estimator(const ProblemInstance& inst, const Vec& p,
                       const std::optional<Vec>& precomputed_rhs = std::nullopt);

/// Dense I + M Lambda, one operator application per unit vector. For test
/// oracles only; refuses n > 64.
Mat assemble_dense_operator(const ProblemInstance& inst);

}  // namespace rbctl
