#include "rbctl/mlp_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "rbctl/errors.hpp"

namespace rbctl {

namespace {

using MatMap = Eigen::Map<const Mat>;
using VecMap = Eigen::Map<const Vec>;

Eigen::Index count_parameters(const std::vector<int>& layers) {
  Eigen::Index total = 0;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    total += static_cast<Eigen::Index>(layers[l + 1]) * (layers[l] + 1);
  }
  return total;
}

}  // namespace

MlpNetwork::MlpNetwork(std::vector<int> layers) : layers_(std::move(layers)) {
  if (layers_.size() < 2) throw std::invalid_argument("MlpNetwork: need input and output layers");
  for (int w : layers_) {
    if (w < 1) throw std::invalid_argument("MlpNetwork: layer widths must be positive");
  }
  params_ = Vec::Zero(count_parameters(layers_));
}

void MlpNetwork::set_parameters(const Vec& params) {
  if (params.size() != params_.size()) throw DimensionError("MlpNetwork: wrong parameter count");
  params_ = params;
}

void MlpNetwork::initialize(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    const int in = layers_[l], out = layers_[l + 1];
    const double limit = std::sqrt(6.0 / (in + out));
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(in) * out; ++i) {
      params_[offset + i] = limit * unit(rng);
    }
    offset += static_cast<Eigen::Index>(in) * out;
    params_.segment(offset, out).setZero();
    offset += out;
  }
}

Mat MlpNetwork::forward(const Mat& X) const {
  if (X.rows() != layers_.front()) throw DimensionError("MlpNetwork::forward: wrong input size");
  Mat a = X;
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    const int in = layers_[l], out = layers_[l + 1];
    const MatMap W(params_.data() + offset, out, in);
    offset += static_cast<Eigen::Index>(in) * out;
    const VecMap b(params_.data() + offset, out);
    offset += out;
    Mat z = W * a;
    z.colwise() += b;
    a = l + 2 < layers_.size() ? Mat(z.array().tanh()) : z;
  }
  return a;
}

double MlpNetwork::loss(const Mat& X, const Mat& Y) const {
  return (forward(X) - Y).squaredNorm() / static_cast<double>(Y.size());
}

double MlpNetwork::loss_and_gradient(const Mat& X, const Mat& Y, Vec& gradient) const {
  if (X.rows() != layers_.front() || Y.rows() != layers_.back() || X.cols() != Y.cols()) {
    throw DimensionError("MlpNetwork::loss_and_gradient: shape mismatch");
  }
  const std::size_t depth = layers_.size() - 1;
  std::vector<Mat> acts;  // acts[l] is the input to layer l
  acts.reserve(depth + 1);
  acts.push_back(X);
  std::vector<Eigen::Index> offsets(depth);
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l < depth; ++l) {
    offsets[l] = offset;
    const int in = layers_[l], out = layers_[l + 1];
    const MatMap W(params_.data() + offset, out, in);
    const VecMap b(params_.data() + offset + static_cast<Eigen::Index>(in) * out, out);
    offset += static_cast<Eigen::Index>(in + 1) * out;
    Mat z = W * acts.back();
    z.colwise() += b;
    acts.push_back(l + 1 < depth ? Mat(z.array().tanh()) : z);
  }
  const Mat diff = acts.back() - Y;
  const double scale = 1.0 / static_cast<double>(Y.size());
  gradient.setZero(params_.size());

  Mat delta = 2.0 * scale * diff;  // d loss / d z for the output layer
  for (std::size_t l = depth; l-- > 0;) {
    const int in = layers_[l], out = layers_[l + 1];
    Eigen::Map<Mat> dW(gradient.data() + offsets[l], out, in);
    Eigen::Map<Vec> db(gradient.data() + offsets[l] + static_cast<Eigen::Index>(in) * out, out);
    dW.noalias() = delta * acts[l].transpose();
    db = delta.rowwise().sum();
    if (l == 0) break;
    const MatMap W(params_.data() + offsets[l], out, in);
    Mat back = W.transpose() * delta;
    delta = back.array() * (1.0 - acts[l].array().square());
  }
  return diff.squaredNorm() * scale;
}

MLPModel::MLPModel(MlpNetwork net, Vec input_low, Vec input_high, Vec output_low, Vec output_high)
    : net_(std::move(net)),
      input_low_(std::move(input_low)),
      input_high_(std::move(input_high)),
      output_low_(std::move(output_low)),
      output_high_(std::move(output_high)) {
  if (net_.layers().front() != input_low_.size() || input_low_.size() != input_high_.size() ||
      net_.layers().back() != output_low_.size() || output_low_.size() != output_high_.size()) {
    throw DimensionError("MLPModel: scaling vectors do not match the network");
  }
}

namespace {

// Affine map of each row of `v` from [low, high] to [0, 1]; degenerate ranges
// map to 0.
Mat to_unit(const Mat& v, const Vec& low, const Vec& high) {
  Mat out(v.rows(), v.cols());
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    const double span = high[r] - low[r];
    out.row(r) = span > 0.0 ? Eigen::RowVectorXd((v.row(r).array() - low[r]) / span)
                            : Eigen::RowVectorXd::Zero(v.cols());
  }
  return out;
}

}  // namespace

Vec MLPModel::predict(const Parameter& mu) const {
  if (mu.size() != input_dim()) throw DimensionError("MLPModel::predict: wrong parameter size");
  const Vec unit = net_.forward(to_unit(mu, input_low_, input_high_)).col(0);
  Vec out(output_dim());
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    const double span = output_high_[j] - output_low_[j];
    out[j] = span > 0.0 ? output_low_[j] + span * unit[j] : output_low_[j];
  }
  return out;
}

MLPModel fit_mlp(const TrainingData& data, const MlpSettings& settings) {
  if (data.size() < 5) throw std::invalid_argument("fit_mlp: need at least five training pairs");
  if (!(settings.val_fraction > 0.0 && settings.val_fraction < 1.0)) {
    throw std::invalid_argument("fit_mlp: val_fraction must lie in (0, 1)");
  }
  if (settings.restarts < 1 || settings.max_steps < 1 || settings.patience < 1) {
    throw std::invalid_argument("fit_mlp: restarts, max_steps and patience must be >= 1");
  }
  const Mat inputs = data.inputs().transpose();
  const Mat targets = data.targets().transpose();
  const Vec in_low = inputs.rowwise().minCoeff(), in_high = inputs.rowwise().maxCoeff();
  const Vec out_low = targets.rowwise().minCoeff(), out_high = targets.rowwise().maxCoeff();
  const Mat X = to_unit(inputs, in_low, in_high);
  const Mat Y = to_unit(targets, out_low, out_high);

  const auto n = static_cast<Eigen::Index>(data.size());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 split_rng(settings.seed);
  std::shuffle(order.begin(), order.end(), split_rng);
  const auto n_val = static_cast<Eigen::Index>(std::ceil(settings.val_fraction * static_cast<double>(n)));
  const Eigen::Index n_train = n - n_val;
  Mat Xt(X.rows(), n_train), Yt(Y.rows(), n_train), Xv(X.rows(), n_val), Yv(Y.rows(), n_val);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index src = order[static_cast<std::size_t>(i)];
    if (i < n_train) {
      Xt.col(i) = X.col(src);
      Yt.col(i) = Y.col(src);
    } else {
      Xv.col(i - n_train) = X.col(src);
      Yv.col(i - n_train) = Y.col(src);
    }
  }

  std::vector<int> layers;
  layers.push_back(static_cast<int>(X.rows()));
  layers.insert(layers.end(), settings.hidden.begin(), settings.hidden.end());
  layers.push_back(static_cast<int>(Y.rows()));

  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::optional<MLPModel> best;
  for (int restart = 0; restart < settings.restarts; ++restart) {
    MlpNetwork net(layers);
    std::mt19937_64 rng(settings.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(restart + 1));
    net.initialize(rng);
    Vec params = net.parameters();
    Vec m = Vec::Zero(params.size()), v = Vec::Zero(params.size()), grad(params.size());
    Vec best_params = params;
    double best_val = net.loss(Xv, Yv);
    int since_best = 0, steps = 0;
    bool diverged = false;
    for (int step = 1; step <= settings.max_steps; ++step) {
      net.loss_and_gradient(Xt, Yt, grad);
      m = beta1 * m + (1.0 - beta1) * grad;
      v = beta2 * v + (1.0 - beta2) * grad.cwiseAbs2();
      const double c1 = 1.0 - std::pow(beta1, step), c2 = 1.0 - std::pow(beta2, step);
      params.array() -= settings.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
      net.set_parameters(params);
      steps = step;
      const double val = net.loss(Xv, Yv);
      if (!std::isfinite(val)) {
        diverged = true;
        break;
      }
      if (val < best_val) {
        best_val = val;
        best_params = params;
        since_best = 0;
      } else if (++since_best >= settings.patience) {
        break;
      }
    }
    if (diverged && !best_params.allFinite()) continue;
    net.set_parameters(best_params);
    const double train = net.loss(Xt, Yt);
    if (!std::isfinite(train)) continue;
    if (!best || train < best->train_loss) {
      MLPModel model(std::move(net), in_low, in_high, out_low, out_high);
      model.train_loss = train;
      model.validation_loss = best_val;
      model.steps_taken = steps;
      best.emplace(std::move(model));
    }
  }
  if (!best) throw std::runtime_error("fit_mlp: training diverged in every restart");
  return std::move(*best);
}

}  // namespace rbctl
