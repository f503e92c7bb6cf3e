#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "rbctl/errors.hpp"
#include "rbctl/numerics.hpp"
#include "test_support.hpp"

using namespace rbctl;
using rbctl::testing::random_vec;

namespace {

Mat random_spd(Eigen::Index n, double cond, std::mt19937_64& rng) {
  Mat q = Eigen::HouseholderQR<Mat>(Mat::NullaryExpr(n, n, [&] { return std::normal_distribution<>()(rng); }))
              .householderQ();
  Vec eig(n);
  for (Eigen::Index i = 0; i < n; ++i) eig[i] = std::pow(cond, -static_cast<double>(i) / (n - 1));
  return q * eig.asDiagonal() * q.transpose();
}

}  // namespace

TEST(InnerProduct, UnitWeightIsEuclidean) {
  std::mt19937_64 rng(1);
  const Vec x = random_vec(7, rng), y = random_vec(7, rng);
  EXPECT_DOUBLE_EQ(dotw(x, y, InnerProduct(1.0)), x.dot(y));
}

TEST(InnerProduct, WeightScalesDotAndRootScalesNorm) {
  std::mt19937_64 rng(2);
  const Vec x = random_vec(9, rng), y = random_vec(9, rng);
  const InnerProduct ip(0.01);
  EXPECT_NEAR(dotw(x, y, ip), 0.01 * x.dot(y), 1e-15 * x.norm() * y.norm());
  EXPECT_NEAR(normw(x, ip), 0.1 * x.norm(), 1e-15 * x.norm());
}

TEST(InnerProduct, RejectsBadWeightAndMismatchedLengths) {
  EXPECT_THROW(InnerProduct(0.0), std::invalid_argument);
  EXPECT_THROW(InnerProduct(-1.0), std::invalid_argument);
  EXPECT_THROW(dotw(Vec::Zero(3), Vec::Zero(4), InnerProduct()), DimensionError);
}

TEST(ConjugateGradient, MatchesDenseLuSolve) {
  std::mt19937_64 rng(3);
  const Mat A = random_spd(30, 1e4, rng);
  const Vec b = random_vec(30, rng);
  const InnerProduct ip(0.2);
  const Vec reference = A.partialPivLu().solve(b);
  for (bool reortho : {false, true}) {
    const CgResult r = cg_solve([&](const Vec& v) { return Vec(A * v); }, b, ip, 1e-12, 300, reortho);
    EXPECT_LE(r.residual_norm, 1e-12);
    EXPECT_LE(normw(b - A * r.solution, ip), 1e-12);
    EXPECT_LE((r.solution - reference).norm(), 1e-7 * reference.norm());
  }
}

TEST(ConjugateGradient, ReorthogonalizationTerminatesInAboutNSteps) {
  std::mt19937_64 rng(4);
  const Mat A = random_spd(40, 1e6, rng);
  const Vec b = random_vec(40, rng);
  const CgResult r =
      cg_solve([&](const Vec& v) { return Vec(A * v); }, b, InnerProduct(), 1e-8, 400, true);
  EXPECT_LE(r.iterations, 60);
  EXPECT_LE(r.residual_norm, 1e-8);
}

TEST(ConjugateGradient, ZeroRightHandSideNeedsNoIterations) {
  const CgResult r = cg_solve([](const Vec& v) { return v; }, Vec::Zero(5), InnerProduct(), 1e-12, 10);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_TRUE(r.solution.isZero());
}

TEST(ConjugateGradient, ThrowsWithBestIterateWhenBudgetRunsOut) {
  std::mt19937_64 rng(5);
  const Mat A = random_spd(50, 10.0, rng);
  const Vec b = random_vec(50, rng);
  const InnerProduct ip;
  try {
    cg_solve([&](const Vec& v) { return Vec(A * v); }, b, ip, 1e-14, 3);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.iterations(), 3);
    EXPECT_LT(e.residual_norm(), normw(b, ip));
    EXPECT_NEAR(normw(b - A * e.best_iterate(), ip), e.residual_norm(), 1e-12 * normw(b, ip));
  }
}

TEST(ConjugateGradient, DetectsIndefiniteOperator) {
  Mat A = Mat::Identity(4, 4);
  A(2, 2) = -1.0;
  Vec b = Vec::Zero(4);
  b[2] = 1.0;
  EXPECT_THROW(cg_solve([&](const Vec& v) { return Vec(A * v); }, b, InnerProduct(), 1e-12, 10),
               ConvergenceError);
}

TEST(GramSchmidt, ProducesOrthonormalBasisInWeightedProduct) {
  std::mt19937_64 rng(6);
  const InnerProduct ip(0.05);
  std::vector<Vec> basis;
  for (int k = 0; k < 12; ++k) {
    // Nearly parallel inputs stress the second pass.
    Vec v = random_vec(20, rng);
    if (!basis.empty()) v += 1e3 * basis.back();
    const auto added = gram_schmidt_extend(basis, v, ip);
    ASSERT_TRUE(added.has_value());
    basis.push_back(*added);
  }
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = 0; j < basis.size(); ++j) {
      EXPECT_NEAR(dotw(basis[i], basis[j], ip), i == j ? 1.0 : 0.0, 1e-10);
    }
  }
}

TEST(GramSchmidt, RejectsVectorsInTheSpan) {
  std::mt19937_64 rng(7);
  const InnerProduct ip(0.3);
  std::vector<Vec> basis;
  for (int k = 0; k < 3; ++k) basis.push_back(*gram_schmidt_extend(basis, random_vec(8, rng), ip));
  const Vec in_span = 2.0 * basis[0] - 0.5 * basis[2];
  EXPECT_FALSE(gram_schmidt_extend(basis, in_span, ip).has_value());
  EXPECT_FALSE(gram_schmidt_extend(basis, Vec::Zero(8), ip).has_value());
}

TEST(Trapezoid, ExactForLinearAndConvergesQuadratically) {
  std::vector<double> line;
  for (int k = 0; k <= 10; ++k) line.push_back(3.0 + 2.0 * k * 0.1);
  EXPECT_NEAR(trapezoid_quad(line, 0.1), 3.0 + 1.0, 1e-14);

  auto err = [](int n) {
    std::vector<double> v;
    for (int k = 0; k <= n; ++k) v.push_back(std::exp(static_cast<double>(k) / n));
    return std::abs(trapezoid_quad(v, 1.0 / n) - (std::exp(1.0) - 1.0));
  };
  EXPECT_NEAR(err(20) / err(40), 4.0, 0.05);
  EXPECT_THROW(trapezoid_quad(std::vector<double>{1.0}, 0.1), std::invalid_argument);
}

TEST(SingularValues, SquaresMatchEigenvaluesOfWeightedGram) {
  std::mt19937_64 rng(8);
  const InnerProduct ip(0.25);
  std::vector<Vec> cols;
  for (int j = 0; j < 6; ++j) cols.push_back(random_vec(15, rng));
  Mat gram(6, 6);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) gram(i, j) = dotw(cols[i], cols[j], ip);
  }
  Vec eig = Eigen::SelfAdjointEigenSolver<Mat>(gram).eigenvalues();
  std::sort(eig.data(), eig.data() + eig.size(), std::greater<>());
  const auto s = svd_singular_values(cols, ip);
  ASSERT_EQ(s.size(), 6u);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(s[i] * s[i], eig[i], 1e-12 * eig[0]);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end(), std::greater<>()));
}

TEST(SingularValues, DuplicateColumnAddsOneZero) {
  std::mt19937_64 rng(9);
  std::vector<Vec> cols;
  for (int j = 0; j < 4; ++j) cols.push_back(random_vec(10, rng));
  cols.push_back(cols[1]);
  const auto s = svd_singular_values(cols, InnerProduct());
  EXPECT_LE(s.back(), 1e-13 * s.front());
  EXPECT_GT(s[3], 1e-6 * s.front());
}
