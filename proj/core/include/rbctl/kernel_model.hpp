#pragma once

#include <vector>

#include "rbctl/greedy_rom.hpp"
#include "rbctl/regressor.hpp"

namespace rbctl {

struct KernelSettings {
  /// Shape parameter of k(x, y) = exp(-(beta |x - y|)^2).
  double beta = 1.0;
  /// P-greedy stops once the largest squared power function value on the
  /// training inputs is <= this.
  double p_greedy_tol = 1e-10;
  double lambda = 0.0;
  /// 0 means no cap besides the training set size.
  int max_centers = 0;
};

/// Sparse Gaussian kernel interpolant sum_i coeffs_i k(., center_i).
class KernelModel final : public CoefficientRegressor {
 public:
  /// centers: one row per center; coeffs: one row per center, N columns.
  KernelModel(Mat centers, Mat coeffs, double beta, double lambda);

  RegressorKind kind() const override { return RegressorKind::kernel; }
  Eigen::Index input_dim() const override { return centers_.cols(); }
  Eigen::Index output_dim() const override { return coeffs_.cols(); }
  Vec predict(const Parameter& mu) const override;

  const Mat& centers() const { return centers_; }
  const Mat& coeffs() const { return coeffs_; }
  double beta() const { return beta_; }
  double lambda() const { return lambda_; }
  /// Squared power function values observed before each selection.
  std::vector<double> selection_power;

 private:
  Mat centers_;
  Mat coeffs_;
  double beta_;
  double lambda_;
};

double gaussian_kernel(const Vec& x, const Vec& y, double beta);

/// P-greedy center selection on the training inputs (Newton basis form),
/// then interpolation of the targets at the selected centers.
KernelModel fit_kernel(const TrainingData& data, const KernelSettings& settings = {});

}  // namespace rbctl
