#include "rbctl/dynamics.hpp"

#include <sstream>
#include <vector>

#include "rbctl/errors.hpp"

namespace rbctl {

namespace {

void require_state_vector(const ProblemInstance& inst, const Vec& v, const char* where) {
  if (v.size() != inst.state_dim()) {
    std::ostringstream msg;
    msg << where << ": expected length " << inst.state_dim() << ", got " << v.size();
    throw DimensionError(msg.str());
  }
}

// Backward sweep that keeps only -R^{-1} B* phi_k, the part the forward
// sweep of a Gramian product needs.
Mat adjoint_controls(const ProblemInstance& inst, const Vec& pT) {
  const StepOperators& ops = inst.steps();
  const int n_t = inst.grid().steps;
  Mat u(inst.control_dim(), n_t + 1);
  Vec phi = pT;
  u.col(n_t) = -inst.solve_R(inst.apply_B_adjoint(phi));
  for (int k = n_t - 1; k >= 0; --k) {
    phi = ops.backward_implicit.solve(ops.backward_explicit * phi);
    u.col(k) = -inst.solve_R(inst.apply_B_adjoint(phi));
  }
  return u;
}

Vec forward_endpoint(const ProblemInstance& inst, const Vec& x_init, const Mat* u) {
  const StepOperators& ops = inst.steps();
  const int n_t = inst.grid().steps;
  const double half_dt = 0.5 * inst.grid().dt();
  Vec x = x_init;
  Vec rhs(x.size());
  for (int k = 0; k < n_t; ++k) {
    rhs.noalias() = ops.forward_explicit * x;
    if (u != nullptr) rhs.noalias() += half_dt * (inst.B() * (u->col(k) + u->col(k + 1)));
    x = ops.forward_implicit.solve(rhs);
  }
  return x;
}

}  // namespace

Trajectory solve_adjoint_backward(const ProblemInstance& inst, const Vec& pT) {
  require_state_vector(inst, pT, "solve_adjoint_backward");
  const StepOperators& ops = inst.steps();
  const int n_t = inst.grid().steps;
  Trajectory out{TrajectoryKind::adjoint, inst.grid(), Mat(inst.state_dim(), n_t + 1)};
  out.values.col(n_t) = pT;
  for (int k = n_t - 1; k >= 0; --k) {
    out.values.col(k) = ops.backward_implicit.solve(ops.backward_explicit * out.values.col(k + 1));
  }
  return out;
}

Trajectory control_from_adjoint(const ProblemInstance& inst, const Trajectory& adjoint) {
  if (adjoint.kind != TrajectoryKind::adjoint) {
    throw std::invalid_argument("control_from_adjoint: expected an adjoint trajectory");
  }
  if (adjoint.values.rows() != inst.state_dim()) {
    throw DimensionError("control_from_adjoint: adjoint has wrong state dimension");
  }
  // u = -R^{-1} (w B^T) Phi for all nodes at once.
  Mat bt_phi = inst.ip().weight * (inst.B().transpose() * adjoint.values);
  Trajectory out{TrajectoryKind::control, adjoint.grid, Mat(inst.control_dim(), adjoint.nodes())};
  for (int k = 0; k < adjoint.nodes(); ++k) out.values.col(k) = -inst.solve_R(bt_phi.col(k));
  return out;
}

Trajectory solve_state_forward(const ProblemInstance& inst, const Vec& x_init,
                               const Trajectory* control) {
  require_state_vector(inst, x_init, "solve_state_forward");
  const int n_t = inst.grid().steps;
  if (control != nullptr &&
      (control->nodes() != n_t + 1 || control->values.rows() != inst.control_dim())) {
    throw DimensionError("solve_state_forward: control is not aligned with the time grid");
  }
  const StepOperators& ops = inst.steps();
  const double half_dt = 0.5 * inst.grid().dt();
  Trajectory out{TrajectoryKind::state, inst.grid(), Mat(inst.state_dim(), n_t + 1)};
  out.values.col(0) = x_init;
  Vec rhs(inst.state_dim());
  for (int k = 0; k < n_t; ++k) {
    rhs.noalias() = ops.forward_explicit * out.values.col(k);
    if (control != nullptr) {
      rhs.noalias() +=
          half_dt * (inst.B() * (control->values.col(k) + control->values.col(k + 1)));
    }
    out.values.col(k + 1) = ops.forward_implicit.solve(rhs);
  }
  return out;
}

Vec free_dynamics_endpoint(const ProblemInstance& inst) {
  return forward_endpoint(inst, inst.x0(), nullptr);
}

Vec apply_gramian(const ProblemInstance& inst, const Vec& p) {
  require_state_vector(inst, p, "apply_gramian");
  const Mat u = adjoint_controls(inst, p);
  return -forward_endpoint(inst, Vec::Zero(inst.state_dim()), &u);
}

Vec apply_system_operator(const ProblemInstance& inst, const Vec& p) {
  return p + inst.M() * apply_gramian(inst, p);
}

Mat apply_gramian_batch(const ProblemInstance& inst, const Mat& P) {
  if (P.rows() != inst.state_dim()) {
    throw DimensionError("apply_gramian_batch: columns have the wrong state dimension");
  }
  const StepOperators& ops = inst.steps();
  const int n_t = inst.grid().steps;
  const double half_dt = 0.5 * inst.grid().dt();
  // Rows of -R^{-1} B*, so that u_k = feedback * phi_k.
  const Mat bstar = inst.ip().weight * inst.B().transpose();
  Mat feedback(inst.control_dim(), inst.state_dim());
  for (Eigen::Index j = 0; j < bstar.cols(); ++j) feedback.col(j) = -inst.solve_R(bstar.col(j));

  // Multi-column solves need a materialized right-hand side; passing the
  // product expression is several times slower.
  std::vector<Mat> u(static_cast<std::size_t>(n_t) + 1);
  Mat phi = P;
  Mat rhs(P.rows(), P.cols());
  u[static_cast<std::size_t>(n_t)] = feedback * phi;
  for (int k = n_t - 1; k >= 0; --k) {
    rhs.noalias() = ops.backward_explicit * phi;
    phi = ops.backward_implicit.solve(rhs);
    u[static_cast<std::size_t>(k)].noalias() = feedback * phi;
  }
  Mat x = Mat::Zero(P.rows(), P.cols());
  for (int k = 0; k < n_t; ++k) {
    const auto j = static_cast<std::size_t>(k);
    rhs.noalias() = ops.forward_explicit * x;
    rhs.noalias() += half_dt * (inst.B() * (u[j] + u[j + 1]));
    x = ops.forward_implicit.solve(rhs);
  }
  return -x;
}

Mat apply_system_operator_batch(const ProblemInstance& inst, const Mat& P) {
  return P + inst.M() * apply_gramian_batch(inst, P);
}

Vec rhs_vector(const ProblemInstance& inst) {
  return inst.M() * (free_dynamics_endpoint(inst) - inst.xT());
}

double evaluate_cost(const ProblemInstance& inst, const Trajectory& control) {
  const Trajectory state = solve_state_forward(inst, inst.x0(), &control);
  const Vec miss = state.final_value() - inst.xT();
  std::vector<double> energy(static_cast<std::size_t>(control.nodes()));
  for (int k = 0; k < control.nodes(); ++k) {
    const Vec uk = control.values.col(k);
    energy[static_cast<std::size_t>(k)] = uk.dot(inst.R() * uk);
  }
  return 0.5 * dotw(miss, inst.M() * miss, inst.ip()) +
         0.5 * trapezoid_quad(energy, inst.grid().dt());
}

double control_norm_dt(const Trajectory& control) {
  if (control.kind != TrajectoryKind::control) {
    throw std::invalid_argument("control_norm_dt: expected a control trajectory");
  }
  const double dt = control.grid.dt();
  const int n_t = control.nodes() - 1;
  return std::sqrt(dt * control.values.rightCols(n_t).squaredNorm());
}

}  // namespace rbctl
