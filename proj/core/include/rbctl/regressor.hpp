#pragma once

#include <string>

#include "rbctl/numerics.hpp"
#include "rbctl/system.hpp"

namespace rbctl {

enum class RegressorKind { kernel, gpr, mlp };

std::string to_string(RegressorKind kind);
/// Accepts "kernel" (alias "vkoga"), "gpr", "mlp" (alias "dnn").
RegressorKind regressor_kind_from_string(const std::string& name);

/// Learned map from a parameter to reduced coefficients. Fitted models are
/// immutable; predict is safe to call concurrently.
class CoefficientRegressor {
 public:
  virtual ~CoefficientRegressor() = default;

  virtual RegressorKind kind() const = 0;
  virtual Eigen::Index input_dim() const = 0;
  virtual Eigen::Index output_dim() const = 0;
  virtual Vec predict(const Parameter& mu) const = 0;
};

}  // namespace rbctl
