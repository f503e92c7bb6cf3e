#include <gtest/gtest.h>

#include <map>

#include "rbctl/errors.hpp"
#include "rbctl/surrogates.hpp"
#include "test_support.hpp"

using namespace rbctl;
using rbctl::testing::param;
using rbctl::testing::random_vec;

namespace {

// Smooth vector-valued test function on [1,2] x [0.5,1.5].
TrainingData synthetic_data(int per_axis, int outputs) {
  TrainingData d;
  const ParameterDomain box(param({1.0, 0.5}), param({2.0, 1.5}));
  d.params = sample_grid(box, {per_axis, per_axis});
  for (const Parameter& mu : d.params) {
    Vec y(outputs);
    for (int j = 0; j < outputs; ++j) y[j] = std::sin((j + 1) * mu[0]) * std::exp(-0.3 * j * mu[1]) / (j + 1);
    d.coeffs.push_back(y);
  }
  return d;
}

// Returns stored coefficients for known parameters.
class LookupRegressor final : public CoefficientRegressor {
 public:
  explicit LookupRegressor(const TrainingData& d) : data_(d) {}
  RegressorKind kind() const override { return RegressorKind::kernel; }
  Eigen::Index input_dim() const override { return data_.param_dim(); }
  Eigen::Index output_dim() const override { return data_.basis_size(); }
  Vec predict(const Parameter& mu) const override {
    for (std::size_t i = 0; i < data_.size(); ++i) {
      if (data_.params[i] == mu) return data_.coeffs[i];
    }
    throw std::out_of_range("unknown parameter");
  }

 private:
  TrainingData data_;
};

struct SmallRom {
  ProblemFamily family = rbctl::testing::small_heat(8, 5);
  GreedyResult greedy;
  SmallRom() {
    GreedyOptions opts;
    opts.tol = 1e-7;
    greedy = greedy_offline(family, sample_grid(family.domain, {4, 4}), opts);
  }
};

const SmallRom& small_rom() {
  static const SmallRom rom;
  return rom;
}

}  // namespace

TEST(Kernel, InterpolatesAtSelectedCenters) {
  const TrainingData d = synthetic_data(8, 4);
  const KernelModel m = fit_kernel(d, KernelSettings{1.0});
  ASSERT_GT(m.centers().rows(), 0);
  for (Eigen::Index c = 0; c < m.centers().rows(); ++c) {
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d.params[i] == Vec(m.centers().row(c).transpose())) {
        EXPECT_LE((m.predict(d.params[i]) - d.coeffs[i]).cwiseAbs().maxCoeff(), 1e-8);
      }
    }
  }
}

TEST(Kernel, PowerFunctionDecreasesAndRespectsTolerance) {
  const TrainingData d = synthetic_data(8, 2);
  KernelSettings s{1.0};
  s.p_greedy_tol = 1e-6;
  const KernelModel m = fit_kernel(d, s);
  ASSERT_EQ(m.selection_power.size(), static_cast<std::size_t>(m.centers().rows()));
  EXPECT_DOUBLE_EQ(m.selection_power.front(), 1.0);
  for (double p : m.selection_power) EXPECT_GT(p, 1e-6);
  EXPECT_LT(m.centers().rows(), 64);
  s.max_centers = 3;
  EXPECT_EQ(fit_kernel(d, s).centers().rows(), 3);
}

TEST(Kernel, RegularizedFitAndConstantTargets) {
  TrainingData d = synthetic_data(5, 3);
  for (auto& c : d.coeffs) c = Vec::Constant(3, 0.7);
  for (double lambda : {0.0, 1e-8}) {
    KernelSettings s{1.0};
    s.lambda = lambda;
    const KernelModel m = fit_kernel(d, s);
    EXPECT_LE((m.predict(param({1.5, 1.0})) - Vec::Constant(3, 0.7)).cwiseAbs().maxCoeff(), 1e-3);
  }
  EXPECT_THROW(fit_kernel(TrainingData{}, KernelSettings{}), std::invalid_argument);
}

TEST(Gpr, LogMarginalLikelihoodMatchesTwoPointClosedForm) {
  Mat X(2, 1);
  X << 0.0, 0.5;
  Mat Y(2, 1);
  Y << 1.0, -0.5;
  const GprHyper h{2.0, 0.7};
  const double jitter = 1e-3;
  const double a = h.scale + jitter;
  const double b = h.scale * std::exp(-0.25 / (2 * 0.49));
  const double det = a * a - b * b;
  const double quad = (a * (1.0 + 0.25) - 2 * b * (1.0 * -0.5)) / det;
  const double expected = -0.5 * quad - 0.5 * std::log(det) - std::log(2 * std::numbers::pi);
  EXPECT_NEAR(gpr_log_marginal_likelihood(X, Y, h, jitter), expected, 1e-12);
}

TEST(Gpr, FitsSmoothDataAndIsDeterministic) {
  const TrainingData d = synthetic_data(6, 3);
  GprSettings s;
  s.restarts = 3;
  s.seed = 9;
  const GPRModel a = fit_gpr(d, s);
  const GPRModel b = fit_gpr(d, s);
  const Parameter mu = param({1.37, 0.93});
  EXPECT_EQ(a.predict(mu), b.predict(mu));
  const TrainingData truth = synthetic_data(6, 3);
  Vec expected(3);
  for (int j = 0; j < 3; ++j) expected[j] = std::sin((j + 1) * mu[0]) * std::exp(-0.3 * j * mu[1]) / (j + 1);
  EXPECT_LE((a.predict(mu) - expected).norm(), 2e-2);
  EXPECT_GE(a.hyper().length, s.length_low);
  EXPECT_LE(a.hyper().scale, s.scale_high);
}

TEST(Gpr, ConstantOutputIsPredictedExactly) {
  TrainingData d = synthetic_data(4, 2);
  for (auto& c : d.coeffs) c[1] = 3.0;
  GprSettings s;
  s.restarts = 1;
  EXPECT_NEAR(fit_gpr(d, s).predict(param({1.2, 1.1}))[1], 3.0, 1e-3);
}

TEST(Mlp, BackpropMatchesCentralDifferences) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 3; ++trial) {
    MlpNetwork net({2, 5 + trial, 4, 3});
    net.initialize(rng);
    const Mat X = Mat::NullaryExpr(2, 7, [&] { return std::normal_distribution<>()(rng); });
    const Mat Y = Mat::NullaryExpr(3, 7, [&] { return std::normal_distribution<>()(rng); });
    Vec grad;
    net.loss_and_gradient(X, Y, grad);
    ASSERT_EQ(grad.size(), net.parameter_count());
    const Vec base = net.parameters();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < base.size(); ++i) {
      const double step = 1e-6;
      Vec p = base;
      p[i] += step;
      net.set_parameters(p);
      const double up = net.loss(X, Y);
      p[i] -= 2 * step;
      net.set_parameters(p);
      const double down = net.loss(X, Y);
      const double fd = (up - down) / (2 * step);
      worst = std::max(worst, std::abs(fd - grad[i]) / std::max(1e-3, std::abs(fd)));
    }
    net.set_parameters(base);
    EXPECT_LE(worst, 1e-5);
  }
}

TEST(Mlp, DeterministicAndLearnsConstantTargets) {
  TrainingData d = synthetic_data(5, 2);
  MlpSettings s;
  s.restarts = 2;
  s.max_steps = 300;
  s.hidden = {10, 10};
  s.seed = 3;
  const MLPModel a = fit_mlp(d, s);
  const MLPModel b = fit_mlp(d, s);
  EXPECT_EQ(a.predict(param({1.5, 0.8})), b.predict(param({1.5, 0.8})));

  for (auto& c : d.coeffs) c = Vec::Constant(2, -1.25);
  EXPECT_LE((fit_mlp(d, s).predict(param({1.1, 1.2})) - Vec::Constant(2, -1.25)).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Mlp, RejectsWrongInputSize) {
  const TrainingData d = synthetic_data(3, 2);
  MlpSettings s;
  s.restarts = 1;
  s.max_steps = 10;
  EXPECT_THROW(fit_mlp(d, s).predict(param({1.0})), DimensionError);
}

TEST(SurrogateOnline, ExactLookupReproducesGrom) {
  const SmallRom& rom = small_rom();
  const LookupRegressor lookup(rom.greedy.data);
  for (std::size_t j : {0u, 7u, 15u}) {
    const Parameter& mu = rom.greedy.data.params[j];
    const ProblemInstance inst = rom.family.build(mu);
    const ReducedSolution g = rom_online(inst, rom.greedy.basis);
    const ReducedSolution s = surrogate_online(inst, mu, rom.greedy.basis, lookup);
    EXPECT_LE(normw(g.phiT_approx - s.phiT_approx, inst.ip()), 1e-12);
    EXPECT_LE((g.control.values - s.control.values).cwiseAbs().maxCoeff(),
              1e-12 * (1 + g.control.values.cwiseAbs().maxCoeff()));
    EXPECT_NEAR(*g.estimated_error, *s.estimated_error, 1e-10 * (1 + *g.estimated_error));
  }
}

TEST(SurrogateOnline, CertifiedEstimateBoundsTrueError) {
  const SmallRom& rom = small_rom();
  KernelSettings ks{1.0};
  const KernelModel model = fit_kernel(rom.greedy.data, ks);
  for (const Parameter& mu : sample_random(rom.family.domain, 5, 1)) {
    const ProblemInstance inst = rom.family.build(mu);
    const ExactSolution ref = solve_exact(inst);
    const ReducedSolution s = surrogate_online(inst, mu, rom.greedy.basis, model);
    EXPECT_LE(normw(ref.phiT - s.phiT_approx, inst.ip()), *s.estimated_error * (1 + 1e-6) + ref.residual_norm);
  }
}

TEST(SurrogateOnline, RejectsModelOfWrongSize) {
  const SmallRom& rom = small_rom();
  const KernelModel wrong = fit_kernel(synthetic_data(3, 1), KernelSettings{});
  const Parameter mu = param({1.5, 1.0});
  EXPECT_THROW(surrogate_online(rom.family.build(mu), mu, rom.greedy.basis, wrong), DimensionError);
}

TEST(Audit, OrthonormalBasisIsAnIsometry) {
  const SmallRom& rom = small_rom();
  const ReducedBasis& basis = rom.greedy.basis;
  EXPECT_NEAR(basis_operator_norm(basis), 1.0, 1e-10);
  std::mt19937_64 rng(4);
  for (int k = 0; k < 10; ++k) {
    const Vec a = random_vec(basis.size(), rng), b = random_vec(basis.size(), rng);
    EXPECT_NEAR(normw(basis.combine(a) - basis.combine(b), basis.ip), (a - b).norm(), 1e-10);
  }
}

TEST(Audit, LookupHasZeroErrorAndTotalsMatchRecomputation) {
  const SmallRom& rom = small_rom();
  const TrainingData& data = rom.greedy.data;
  const AuditReport exact = ml_error_bound_audit(rom.greedy.basis, LookupRegressor(data), data, 1e-7);
  EXPECT_EQ(exact.max_coeff_error, 0.0);
  EXPECT_EQ(exact.max_adjoint_shift, 0.0);

  const KernelModel model = fit_kernel(data, KernelSettings{1.0, 1e-4});
  const AuditReport r = ml_error_bound_audit(rom.greedy.basis, model, data, 1e-7);
  ASSERT_EQ(r.rows.size(), data.size());
  EXPECT_TRUE(r.shift_within_bound);
  double max_err = 0.0, sum_shift = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Vec delta = data.coeffs[i] - model.predict(data.params[i]);
    max_err = std::max(max_err, delta.norm());
    sum_shift += normw(rom.greedy.basis.combine(delta), rom.greedy.basis.ip);
    EXPECT_NEAR(r.rows[i].bound, 1e-7 + r.basis_norm * r.rows[i].coeff_error, 1e-15);
  }
  EXPECT_NEAR(r.max_coeff_error, max_err, 1e-10 * (1 + max_err));
  EXPECT_NEAR(r.mean_adjoint_shift, sum_shift / data.size(), 1e-10 * (1 + sum_shift));
}
