#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "rbctl/dynamics.hpp"
#include "rbctl/errors.hpp"
#include "rbctl/exact_solver.hpp"
#include "test_support.hpp"

using namespace rbctl;
using rbctl::testing::param;
using rbctl::testing::random_vec;

namespace {

// Continuous Gramian int_0^T e^{As} Q e^{A^T s} ds by Van Loan's block
// exponential, with Q = B R^{-1} B* and B* = w B^T.
Mat van_loan_gramian(const ProblemInstance& inst) {
  const Eigen::Index n = inst.state_dim();
  const Mat A = Mat(inst.A());
  const Mat Q = inst.B() * inst.R().inverse() * (inst.ip().weight * inst.B().transpose());
  Mat C = Mat::Zero(2 * n, 2 * n);
  C.topLeftCorner(n, n) = -A;
  C.topRightCorner(n, n) = Q;
  C.bottomRightCorner(n, n) = A.transpose();
  const Mat E = (C * inst.grid().final_time).exp();
  return E.bottomRightCorner(n, n).transpose() * E.topRightCorner(n, n);
}

Mat dense_gramian(const ProblemInstance& inst) {
  const Eigen::Index n = inst.state_dim();
  Mat G(n, n);
  for (Eigen::Index j = 0; j < n; ++j) G.col(j) = apply_gramian(inst, Vec::Unit(n, j));
  return G;
}

}  // namespace

TEST(Dynamics, FreeEndpointConvergesToMatrixExponentialAtSecondOrder) {
  const Parameter mu = param({1.3, 1.0});
  auto error = [&](int spp) {
    const ProblemInstance inst = build_heat_family(8, 0.1, spp).build(mu);
    const Vec exact = (Mat(inst.A()) * 0.1).exp() * inst.x0();
    return normw(free_dynamics_endpoint(inst) - exact, inst.ip());
  };
  const double e1 = error(4), e2 = error(8);
  EXPECT_LT(e2, 1e-3);
  EXPECT_NEAR(e1 / e2, 4.0, 0.4);
}

TEST(Dynamics, StateTrajectoryStartsAtInitialValueAndMatchesEndpoint) {
  const ProblemInstance inst = rbctl::testing::small_heat().build(param({1.0, 1.0}));
  const Trajectory x = solve_state_forward(inst, inst.x0());
  EXPECT_EQ(x.nodes(), inst.grid().nodes());
  EXPECT_EQ(x.at(0), inst.x0());
  EXPECT_LE((x.final_value() - free_dynamics_endpoint(inst)).norm(), 1e-14);
}

TEST(Dynamics, AdjointTrajectoryEndsAtFinalValue) {
  const ProblemInstance inst = rbctl::testing::small_wave().build(param({5.0}));
  std::mt19937_64 rng(1);
  const Vec pT = random_vec(inst.state_dim(), rng);
  const Trajectory phi = solve_adjoint_backward(inst, pT);
  EXPECT_EQ(phi.kind, TrajectoryKind::adjoint);
  EXPECT_EQ(phi.final_value(), pT);
  EXPECT_THROW(solve_adjoint_backward(inst, Vec::Zero(3)), DimensionError);
}

TEST(Dynamics, ControlFromAdjointRequiresAdjoint) {
  const ProblemInstance inst = rbctl::testing::small_heat().build(param({1.0, 1.0}));
  const Trajectory state = solve_state_forward(inst, inst.x0());
  EXPECT_THROW(control_from_adjoint(inst, state), std::invalid_argument);
}

TEST(Gramian, MatchesVanLoanIntegralAtSecondOrder) {
  for (const bool wave : {false, true}) {
    auto error = [&](int spp) {
      const ProblemInstance inst = wave ? build_wave_family(4, 1.0, spp, 10.0).build(param({5.0}))
                                        : build_heat_family(5, 0.1, spp).build(param({1.4, 1.0}));
      const Mat exact = van_loan_gramian(inst);
      return (dense_gramian(inst) - exact).norm() / exact.norm();
    };
    const double e1 = error(10), e2 = error(20);
    EXPECT_LT(e2, 5e-3) << (wave ? "wave" : "heat");
    EXPECT_NEAR(e1 / e2, 4.0, 0.6) << (wave ? "wave" : "heat");
  }
}

TEST(Gramian, SymmetricPositiveDefiniteForControllablePair) {
  const ProblemInstance inst = build_heat_family(6, 0.1, 10).build(param({1.7, 0.6}));
  // Kalman rank condition for (A, B).
  const Mat A = Mat(inst.A());
  Mat K(6, 12);
  Mat block = inst.B();
  for (int k = 0; k < 6; ++k) {
    K.middleCols(2 * k, 2) = block;
    block = A * block;
  }
  ASSERT_EQ(Eigen::FullPivLU<Mat>(K).rank(), 6);
  const Mat G = dense_gramian(inst);
  // Lambda is self-adjoint in <.,.>_w, i.e. w G is symmetric; w is scalar.
  EXPECT_LE((G - G.transpose()).norm(), 1e-10 * G.norm());
  const Vec eig = Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (G + G.transpose())).eigenvalues();
  EXPECT_GT(eig.minCoeff(), 0.0);
}

TEST(Gramian, SystemOperatorIsIdentityPlusMLambda) {
  const ProblemInstance inst = rbctl::testing::small_wave().build(param({7.0}));
  std::mt19937_64 rng(2);
  const Vec p = random_vec(inst.state_dim(), rng);
  EXPECT_LE((apply_system_operator(inst, p) - (p + inst.M() * apply_gramian(inst, p))).norm(), 1e-12 * p.norm());
}

TEST(Gramian, BatchMatchesColumnwiseApply) {
  std::mt19937_64 rng(8);
  for (const ProblemFamily& f : {rbctl::testing::small_heat(), rbctl::testing::small_wave()}) {
    const ProblemInstance inst = f.build(f.domain.lows());
    Mat P(inst.state_dim(), 4);
    for (Eigen::Index j = 0; j < P.cols(); ++j) P.col(j) = random_vec(inst.state_dim(), rng);
    const Mat batch = apply_system_operator_batch(inst, P);
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
      const Vec single = apply_system_operator(inst, P.col(j));
      EXPECT_LE((batch.col(j) - single).norm(), 1e-12 * single.norm());
    }
  }
  const ProblemInstance inst = rbctl::testing::small_heat().build(param({1.0, 1.0}));
  EXPECT_THROW(apply_gramian_batch(inst, Mat::Zero(3, 2)), DimensionError);
}

TEST(Cost, QuadraticTermsAndOptimalityOfExactControl) {
  const ProblemInstance inst = rbctl::testing::small_heat(6, 10).build(param({1.2, 1.3}));
  const ExactSolution sol = solve_exact(inst);
  const double J = evaluate_cost(inst, sol.control);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 5; ++k) {
    Trajectory perturbed = sol.control;
    perturbed.values += 0.05 * sol.control.values.norm() / std::sqrt(perturbed.values.size()) *
                        Mat::NullaryExpr(perturbed.values.rows(), perturbed.values.cols(),
                                         [&] { return std::normal_distribution<>()(rng); });
    EXPECT_GT(evaluate_cost(inst, perturbed), J);
  }
  // With u = 0 only the terminal miss is left.
  Trajectory zero{TrajectoryKind::control, inst.grid(), Mat::Zero(2, inst.grid().nodes())};
  const Vec miss = free_dynamics_endpoint(inst) - inst.xT();
  EXPECT_NEAR(evaluate_cost(inst, zero), 0.5 * dotw(miss, miss, inst.ip()), 1e-14);
}

TEST(ControlNorm, ConstantControlGivesRootTimeTimesMagnitude) {
  const TimeGrid grid(2.0, 40);
  Trajectory u{TrajectoryKind::control, grid, Mat::Constant(2, 41, 3.0)};
  EXPECT_NEAR(control_norm_dt(u), std::sqrt(2.0) * std::sqrt(18.0), 1e-12);
  u.kind = TrajectoryKind::state;
  EXPECT_THROW(control_norm_dt(u), std::invalid_argument);
}
