#include "rbctl/gpr_model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "rbctl/errors.hpp"

namespace rbctl {

namespace {

Mat kernel_matrix(const Mat& X, const GprHyper& hyper, double jitter) {
  const Eigen::Index n = X.rows();
  Mat K(n, n);
  const double inv = 1.0 / (2.0 * hyper.length * hyper.length);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      K(i, j) = K(j, i) = hyper.scale * std::exp(-(X.row(i) - X.row(j)).squaredNorm() * inv);
    }
  }
  K.diagonal().array() += jitter;
  return K;
}

struct Box {
  double lo[2];
  double hi[2];
};

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

}  // namespace

double gpr_log_marginal_likelihood(const Mat& inputs, const Mat& normalized_targets,
                                   const GprHyper& hyper, double jitter) {
  Eigen::LLT<Mat> llt(kernel_matrix(inputs, hyper, jitter));
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const Mat alpha = llt.solve(normalized_targets);
  const double n = static_cast<double>(inputs.rows());
  const double outputs = static_cast<double>(normalized_targets.cols());
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double fit = (normalized_targets.array() * alpha.array()).sum();
  const double value = -0.5 * fit - outputs * (0.5 * log_det + 0.5 * n * std::log(2.0 * std::numbers::pi));
  return std::isfinite(value) ? value : -std::numeric_limits<double>::infinity();
}

GPRModel::GPRModel(Mat inputs, Mat normalized_targets, Vec mean, Vec stddev, GprHyper hyper,
                   double jitter)
    : inputs_(std::move(inputs)),
      targets_(std::move(normalized_targets)),
      mean_(std::move(mean)),
      stddev_(std::move(stddev)),
      hyper_(hyper),
      jitter_(jitter) {
  if (inputs_.rows() != targets_.rows() || targets_.cols() != mean_.size() ||
      mean_.size() != stddev_.size()) {
    throw DimensionError("GPRModel: inconsistent shapes");
  }
  Eigen::LLT<Mat> llt(kernel_matrix(inputs_, hyper_, jitter_));
  if (llt.info() != Eigen::Success) {
    throw FactorizationError("GPRModel: kernel matrix plus jitter is not positive definite");
  }
  weights_ = llt.solve(targets_);
}

Vec GPRModel::predict(const Parameter& mu) const {
  if (mu.size() != input_dim()) throw DimensionError("GPRModel::predict: wrong parameter size");
  const double inv = 1.0 / (2.0 * hyper_.length * hyper_.length);
  Vec k(inputs_.rows());
  for (Eigen::Index i = 0; i < inputs_.rows(); ++i) {
    k[i] = hyper_.scale * std::exp(-(inputs_.row(i).transpose() - mu).squaredNorm() * inv);
  }
  const Vec normalized = weights_.transpose() * k;
  return (normalized.array() * stddev_.array() + mean_.array()).matrix();
}

GPRModel fit_gpr(const TrainingData& data, const GprSettings& settings) {
  if (data.size() < 2) throw std::invalid_argument("fit_gpr: need at least two training pairs");
  if (settings.restarts < 0 || settings.sweeps < 1) {
    throw std::invalid_argument("fit_gpr: restarts must be >= 0 and sweeps >= 1");
  }
  const Mat X = data.inputs();
  const Mat Y = data.targets();
  const Vec mean = Y.colwise().mean().transpose();
  Vec stddev(Y.cols());
  for (Eigen::Index j = 0; j < Y.cols(); ++j) {
    const double var = (Y.col(j).array() - mean[j]).square().mean();
    stddev[j] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  Mat Z(Y.rows(), Y.cols());
  for (Eigen::Index j = 0; j < Y.cols(); ++j) Z.col(j) = (Y.col(j).array() - mean[j]) / stddev[j];

  const Box box{{std::log(settings.scale_low), std::log(settings.length_low)},
                {std::log(settings.scale_high), std::log(settings.length_high)}};
  auto objective = [&](const double z[2]) {
    return gpr_log_marginal_likelihood(X, Z, GprHyper{std::exp(z[0]), std::exp(z[1])},
                                       settings.jitter);
  };

  std::mt19937_64 rng(settings.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double best_z[2] = {0.0, 0.0};
  double best_value = -std::numeric_limits<double>::infinity();
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;

  for (int start = 0; start <= settings.restarts; ++start) {
    double z[2];
    for (int c = 0; c < 2; ++c) {
      z[c] = start == 0 ? clamp(0.0, box.lo[c], box.hi[c])
                        : box.lo[c] + (box.hi[c] - box.lo[c]) * unit(rng);
    }
    double value = objective(z);
    double width[2] = {box.hi[0] - box.lo[0], box.hi[1] - box.lo[1]};
    for (int sweep = 0; sweep < settings.sweeps; ++sweep) {
      for (int c = 0; c < 2; ++c) {
        double a = std::max(box.lo[c], z[c] - 0.5 * width[c]);
        double b = std::min(box.hi[c], z[c] + 0.5 * width[c]);
        double probe[2] = {z[0], z[1]};
        auto at = [&](double t) {
          probe[c] = t;
          return objective(probe);
        };
        double x1 = b - golden * (b - a), x2 = a + golden * (b - a);
        double f1 = at(x1), f2 = at(x2);
        for (int it = 0; it < 40 && b - a > 1e-8; ++it) {
          if (f1 >= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - golden * (b - a);
            f1 = at(x1);
          } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + golden * (b - a);
            f2 = at(x2);
          }
        }
        const double cand = f1 >= f2 ? x1 : x2;
        const double cand_value = std::max(f1, f2);
        if (cand_value > value) {
          z[c] = cand;
          value = cand_value;
        }
        width[c] *= 0.5;
      }
    }
    if (value > best_value) {
      best_value = value;
      best_z[0] = z[0];
      best_z[1] = z[1];
    }
  }
  if (!std::isfinite(best_value)) {
    throw FactorizationError("fit_gpr: kernel matrix could not be factorized for any start");
  }
  GPRModel model(X, Z, mean, stddev, GprHyper{std::exp(best_z[0]), std::exp(best_z[1])},
                 settings.jitter);
  model.log_marginal_likelihood = best_value;
  return model;
}

}  // namespace rbctl
