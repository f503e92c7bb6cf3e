#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "rbctl/greedy_rom.hpp"
#include "rbctl/regressor.hpp"

namespace rbctl {

/// Fully connected tanh network with a linear output layer. Parameters live
/// in one flat vector: per layer the weight matrix (out x in, column-major)
/// followed by the bias.
class MlpNetwork {
 public:
  /// layers = {inputs, hidden..., outputs}
  explicit MlpNetwork(std::vector<int> layers);

  const std::vector<int>& layers() const { return layers_; }
  Eigen::Index parameter_count() const { return params_.size(); }
  const Vec& parameters() const { return params_; }
  void set_parameters(const Vec& params);

  /// Glorot-uniform weights, zero biases.
  void initialize(std::mt19937_64& rng);

  /// X has one sample per column; returns one output per column.
  Mat forward(const Mat& X) const;
  /// Mean squared error over all entries of Y (one sample per column).
  double loss(const Mat& X, const Mat& Y) const;
  /// Loss plus its gradient with respect to parameters().
  double loss_and_gradient(const Mat& X, const Mat& Y, Vec& gradient) const;

 private:
  std::vector<int> layers_;
  Vec params_;
};

struct MlpSettings {
  std::vector<int> hidden = {50, 50, 50};
  int restarts = 10;
  double val_fraction = 0.1;
  /// Steps without a new best validation loss before stopping.
  int patience = 500;
  int max_steps = 5000;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
};

/// Network on min-max scaled inputs and [0, 1]-scaled outputs.
class MLPModel final : public CoefficientRegressor {
 public:
  MLPModel(MlpNetwork net, Vec input_low, Vec input_high, Vec output_low, Vec output_high);

  RegressorKind kind() const override { return RegressorKind::mlp; }
  Eigen::Index input_dim() const override { return input_low_.size(); }
  Eigen::Index output_dim() const override { return output_low_.size(); }
  Vec predict(const Parameter& mu) const override;

  const MlpNetwork& network() const { return net_; }
  const Vec& input_low() const { return input_low_; }
  const Vec& input_high() const { return input_high_; }
  const Vec& output_low() const { return output_low_; }
  const Vec& output_high() const { return output_high_; }

  double train_loss = 0.0;
  double validation_loss = 0.0;
  int steps_taken = 0;

 private:
  MlpNetwork net_;
  Vec input_low_, input_high_, output_low_, output_high_;
};

/// Full-batch Adam with early stopping on a seeded validation split; the
/// restart with the lowest final training loss wins.
MLPModel fit_mlp(const TrainingData& data, const MlpSettings& settings = {});

}  // namespace rbctl
