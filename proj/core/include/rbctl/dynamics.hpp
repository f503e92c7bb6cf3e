#pragma once

#include "rbctl/numerics.hpp"
#include "rbctl/system.hpp"

namespace rbctl {

enum class TrajectoryKind { state, adjoint, control };

/// Values at the n_t + 1 nodes of a TimeGrid; column k holds time t_k.
struct Trajectory {
  TrajectoryKind kind = TrajectoryKind::state;
  TimeGrid grid;
  Mat values;

  int nodes() const { return static_cast<int>(values.cols()); }
  Vec at(int k) const { return values.col(k); }
  Vec final_value() const { return values.col(values.cols() - 1); }
};

/// Crank-Nicolson for -phi' = A* phi, phi(T) = pT, stepping T -> 0.
Trajectory solve_adjoint_backward(const ProblemInstance& inst, const Vec& pT);

/// u_k = -R^{-1} B* phi_k at every node.
Trajectory control_from_adjoint(const ProblemInstance& inst, const Trajectory& adjoint);

/// Crank-Nicolson for x' = A x + B u with node-valued u averaged
/// trapezoidally over each step. `control == nullptr` means u = 0.
Trajectory solve_state_forward(const ProblemInstance& inst, const Vec& x_init,
                               const Trajectory* control = nullptr);

/// x(T) of the uncontrolled system started at x0 (the e^{AT} x0 term).
Vec free_dynamics_endpoint(const ProblemInstance& inst);

/// Weighted controllability Gramian applied to p, matrix-free:
/// backward adjoint from p, control, forward state from 0; returns -x(T).
Vec apply_gramian(const ProblemInstance& inst, const Vec& p);

/// (I + M Lambda) p.
Vec apply_system_operator(const ProblemInstance& inst, const Vec& p);

/// apply_gramian / apply_system_operator for every column of P in one pair
/// of sweeps.
Mat apply_gramian_batch(const ProblemInstance& inst, const Mat& P);
Mat apply_system_operator_batch(const ProblemInstance& inst, const Mat& P);

/// M (e^{AT} x0 - xT).
Vec rhs_vector(const ProblemInstance& inst);

/// J(u) with the terminal term in the state inner product and the control
/// energy integrated by the trapezoidal rule.
double evaluate_cost(const ProblemInstance& inst, const Trajectory& control);

/// sqrt(dt * sum_{i=1..n_t} |u_i|^2); node 0 is not included.
double control_norm_dt(const Trajectory& control);

}  // namespace rbctl
