#pragma once

#include <cstdint>

#include <Eigen/Cholesky>

#include "rbctl/greedy_rom.hpp"
#include "rbctl/regressor.hpp"

namespace rbctl {

struct GprSettings {
  int restarts = 10;
  /// Added to the kernel diagonal (in normalized output units).
  double jitter = 1e-3;
  std::uint64_t seed = 0;
  /// Coordinate sweeps of golden-section search per start.
  int sweeps = 20;
  double scale_low = 0.1, scale_high = 1000.0;
  double length_low = 1e-3, length_high = 1000.0;
};

/// Hyper-parameters of k(x, y) = scale * exp(-|x - y|^2 / (2 length^2)).
struct GprHyper {
  double scale = 1.0;
  double length = 1.0;
};

/// Gaussian process posterior mean with per-output normalization; all
/// outputs share one kernel.
class GPRModel final : public CoefficientRegressor {
 public:
  GPRModel(Mat inputs, Mat normalized_targets, Vec mean, Vec stddev, GprHyper hyper,
           double jitter);

  RegressorKind kind() const override { return RegressorKind::gpr; }
  Eigen::Index input_dim() const override { return inputs_.cols(); }
  Eigen::Index output_dim() const override { return mean_.size(); }
  Vec predict(const Parameter& mu) const override;

  const Mat& inputs() const { return inputs_; }
  const Mat& normalized_targets() const { return targets_; }
  const Vec& mean() const { return mean_; }
  const Vec& stddev() const { return stddev_; }
  const GprHyper& hyper() const { return hyper_; }
  double jitter() const { return jitter_; }
  /// Summed log-marginal likelihood at the fitted hyper-parameters.
  double log_marginal_likelihood = 0.0;

 private:
  Mat inputs_;
  Mat targets_;
  Vec mean_;
  Vec stddev_;
  GprHyper hyper_;
  double jitter_;
  Mat weights_;  // (K + jitter I)^{-1} targets
};

/// Sum over outputs of log p(y_j | X, hyper); -inf if the kernel matrix
/// cannot be factorized.
double gpr_log_marginal_likelihood(const Mat& inputs, const Mat& normalized_targets,
                                   const GprHyper& hyper, double jitter);

/// Multi-start coordinate-wise golden-section search in log space over the
/// box in `settings`. Start 0 is (1, 1); the others are log-uniform draws.
GPRModel fit_gpr(const TrainingData& data, const GprSettings& settings = {});

}  // namespace rbctl
