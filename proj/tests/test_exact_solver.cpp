#include <gtest/gtest.h>

#include "rbctl/errors.hpp"
#include "rbctl/exact_solver.hpp"
#include "test_support.hpp"

using namespace rbctl;
using rbctl::testing::param;
using rbctl::testing::random_vec;

namespace {

double operator_norm(const Mat& op) { return Eigen::JacobiSVD<Mat>(op).singularValues()[0]; }

}  // namespace

TEST(ExactSolver, TinyHeatMatchesDenseDirectSolve) {
  const ProblemFamily fam = build_heat_family(4);
  for (const Parameter& mu : {param({1.0, 0.5}), param({1.5, 1.0}), param({2.0, 1.5})}) {
    const ProblemInstance inst = fam.build(mu);
    const Vec direct = assemble_dense_operator(inst).partialPivLu().solve(rhs_vector(inst));
    const ExactSolution sol = solve_exact(inst);
    EXPECT_LE(normw(sol.phiT - direct, inst.ip()), 1e-9);
    EXPECT_LE(sol.residual_norm, 1e-12);
  }
}

TEST(ExactSolver, TinyWaveMatchesDenseDirectSolve) {
  const ProblemInstance inst = build_wave_family(6, 1.0, 10, 10.0).build(param({6.0}));
  const Vec direct = assemble_dense_operator(inst).partialPivLu().solve(rhs_vector(inst));
  ExactSolverOptions opts;
  opts.cg_tol = 1e-11;
  const ExactSolution sol = solve_exact(inst, opts);
  EXPECT_LE(normw(sol.phiT - direct, inst.ip()), 1e-10);
}

TEST(ExactSolver, FinalAdjointEqualsWeightedTerminalMiss) {
  // phi(T) = M (x(T) - xT) for the reconstructed optimal state.
  const ProblemInstance inst = rbctl::testing::small_wave(8, 10).build(param({4.0}));
  ExactSolverOptions opts;
  opts.cg_tol = 1e-11;
  const ExactSolution sol = solve_exact(inst, opts);
  const Vec miss = inst.M() * (sol.state.final_value() - inst.xT());
  EXPECT_LE(normw(sol.phiT - miss, inst.ip()), 1e-10);
  EXPECT_EQ(sol.control.kind, TrajectoryKind::control);
  EXPECT_EQ(sol.state.at(0), inst.x0());
}

TEST(ExactSolver, ThrowsWhenIterationBudgetIsTooSmall) {
  const ProblemInstance inst = rbctl::testing::small_wave(8, 5).build(param({9.0}));
  ExactSolverOptions opts;
  opts.max_iter = 2;
  EXPECT_THROW(solve_exact(inst, opts), ConvergenceError);
}

TEST(ErrorEstimator, TwoSidedBoundOnTinyInstances) {
  std::mt19937_64 rng(21);
  for (const bool wave : {false, true}) {
    const ProblemInstance inst = wave ? build_wave_family(5, 1.0, 10, 10.0).build(param({8.0}))
                                      : build_heat_family(6, 0.1, 10).build(param({1.9, 0.7}));
    const Mat op = assemble_dense_operator(inst);
    const Vec rhs = rhs_vector(inst);
    const Vec phi = op.partialPivLu().solve(rhs);
    const double norm = operator_norm(op);
    for (int k = 0; k < 20; ++k) {
      const Vec p = phi + std::pow(10.0, -k % 6) * random_vec(phi.size(), rng);
      const double err = normw(phi - p, inst.ip());
      const double eta = error_estimator(inst, p, rhs);
      EXPECT_LE(err, eta * (1 + 1e-6));
      EXPECT_LE(eta, norm * err * (1 + 1e-6));
    }
  }
}

TEST(ErrorEstimator, VanishesAtSolutionAndAgreesWithOrWithoutRhs) {
  const ProblemInstance inst = rbctl::testing::small_heat().build(param({1.1, 0.9}));
  const ExactSolution sol = solve_exact(inst);
  EXPECT_LE(error_estimator(inst, sol.phiT), 1e-12);
  const Vec p = Vec::Ones(inst.state_dim());
  EXPECT_DOUBLE_EQ(error_estimator(inst, p), error_estimator(inst, p, rhs_vector(inst)));
  EXPECT_THROW(error_estimator(inst, Vec::Ones(2)), DimensionError);
}

TEST(DenseOperator, RefusesLargeInstances) {
  const ProblemInstance inst = build_heat_family(65, 0.1, 1).build(param({1.0, 1.0}));
  EXPECT_THROW(assemble_dense_operator(inst), DimensionError);
}
