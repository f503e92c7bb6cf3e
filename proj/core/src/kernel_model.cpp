#include "rbctl/kernel_model.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

#include "rbctl/errors.hpp"

namespace rbctl {

double gaussian_kernel(const Vec& x, const Vec& y, double beta) {
  const double r = beta * (x - y).norm();
  return std::exp(-r * r);
}

KernelModel::KernelModel(Mat centers, Mat coeffs, double beta, double lambda)
    : centers_(std::move(centers)), coeffs_(std::move(coeffs)), beta_(beta), lambda_(lambda) {
  if (centers_.rows() != coeffs_.rows() || centers_.rows() == 0) {
    throw DimensionError("KernelModel: need one coefficient row per center");
  }
  if (!(beta_ > 0.0)) throw std::invalid_argument("KernelModel: beta must be positive");
}

Vec KernelModel::predict(const Parameter& mu) const {
  if (mu.size() != input_dim()) throw DimensionError("KernelModel::predict: wrong parameter size");
  Vec out = Vec::Zero(output_dim());
  for (Eigen::Index i = 0; i < centers_.rows(); ++i) {
    out += gaussian_kernel(mu, centers_.row(i).transpose(), beta_) * coeffs_.row(i).transpose();
  }
  return out;
}

KernelModel fit_kernel(const TrainingData& data, const KernelSettings& settings) {
  if (data.size() == 0) throw std::invalid_argument("fit_kernel: no training data");
  if (!(settings.beta > 0.0)) throw std::invalid_argument("fit_kernel: beta must be positive");
  if (settings.lambda < 0.0) throw std::invalid_argument("fit_kernel: lambda must be >= 0");
  const Mat X = data.inputs();
  const Mat Y = data.targets();
  const Eigen::Index n = X.rows();
  const Eigen::Index cap = settings.max_centers > 0 ? std::min<Eigen::Index>(settings.max_centers, n) : n;

  // newton(i, j): j-th Newton basis function at training input i.
  Mat newton = Mat::Zero(n, cap);
  Vec power2(n);
  for (Eigen::Index i = 0; i < n; ++i) power2[i] = gaussian_kernel(X.row(i), X.row(i), settings.beta);
  std::vector<Eigen::Index> selected;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  std::vector<double> history;

  for (Eigen::Index k = 0; k < cap; ++k) {
    Eigen::Index best = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      if (best < 0 || power2[i] > power2[best]) best = i;
    }
    if (best < 0 || power2[best] <= settings.p_greedy_tol) break;
    history.push_back(power2[best]);
    const double pivot = std::sqrt(power2[best]);
    for (Eigen::Index i = 0; i < n; ++i) {
      double v = gaussian_kernel(X.row(i), X.row(best), settings.beta);
      v -= newton.row(i).head(k).dot(newton.row(best).head(k));
      newton(i, k) = v / pivot;
    }
    for (Eigen::Index i = 0; i < n; ++i) power2[i] = std::max(0.0, power2[i] - newton(i, k) * newton(i, k));
    power2[best] = 0.0;
    used[static_cast<std::size_t>(best)] = true;
    selected.push_back(best);
  }
  if (selected.empty()) throw std::runtime_error("fit_kernel: no center selected");

  const auto m = static_cast<Eigen::Index>(selected.size());
  Mat centers(m, X.cols());
  Mat targets(m, Y.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    centers.row(i) = X.row(selected[static_cast<std::size_t>(i)]);
    targets.row(i) = Y.row(selected[static_cast<std::size_t>(i)]);
  }

  Mat coeffs;
  if (settings.lambda == 0.0) {
    // The Newton values at the centers are the Cholesky factor of K.
    Mat L(m, m);
    for (Eigen::Index i = 0; i < m; ++i) L.row(i) = newton.row(selected[static_cast<std::size_t>(i)]).head(m);
    const Mat half = L.triangularView<Eigen::Lower>().solve(targets);
    coeffs = L.transpose().triangularView<Eigen::Upper>().solve(half);
  } else {
    Mat K(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) K(i, j) = gaussian_kernel(centers.row(i), centers.row(j), settings.beta);
    }
    K.diagonal().array() += settings.lambda;
    Eigen::LLT<Mat> llt(K);
    if (llt.info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "fit_kernel: kernel matrix is not numerically positive definite (beta = "
          << settings.beta << ", lambda = " << settings.lambda
          << "); try a larger lambda or a smaller beta";
      throw FactorizationError(msg.str());
    }
    coeffs = llt.solve(targets);
  }
  if (!coeffs.allFinite()) {
    throw FactorizationError("fit_kernel: non-finite coefficients; try a larger lambda or a smaller beta");
  }
  KernelModel model(std::move(centers), std::move(coeffs), settings.beta, settings.lambda);
  model.selection_power = std::move(history);
  return model;
}

}  // namespace rbctl
