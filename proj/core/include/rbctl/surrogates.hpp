#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include "rbctl/gpr_model.hpp"
#include "rbctl/greedy_rom.hpp"
#include "rbctl/kernel_model.hpp"
#include "rbctl/mlp_model.hpp"
#include "rbctl/regressor.hpp"

namespace rbctl {

/// Reduced solution with coefficients predicted at `mu`, which must be the
/// parameter `inst` was built from. With `certify`, the full residual
/// estimator is evaluated (no cached states exist on this path).
ReducedSolution surrogate_online(const ProblemInstance& inst, const Parameter& mu,
                                 const ReducedBasis& basis, const CoefficientRegressor& model,
                                 bool certify = true);

/// Spectral norm of the coefficient-to-state map a -> sum_i a_i basis_i,
/// from R^N (Euclidean) to the state space with the basis inner product.
double basis_operator_norm(const ReducedBasis& basis);

struct AuditRow {
  Parameter mu;
  double coeff_error = 0.0;   // |alpha - alpha_hat|_2
  double adjoint_shift = 0.0; // normw(sum_i (alpha_i - alpha_hat_i) basis_i)
  double bound = 0.0;         // eps_tilde + |basis op| * coeff_error
};

struct AuditReport {
  std::vector<AuditRow> rows;
  double basis_norm = 0.0;
  double max_coeff_error = 0.0;
  double mean_coeff_error = 0.0;
  double max_adjoint_shift = 0.0;
  double mean_adjoint_shift = 0.0;
  /// Every shift is at most basis_norm * coeff_error (up to rounding).
  bool shift_within_bound = true;
};

/// Splits the surrogate error on pairs with known coefficients into the
/// greedy tolerance and the coefficient-regression term.
AuditReport ml_error_bound_audit(const ReducedBasis& basis, const CoefficientRegressor& model,
                                 const TrainingData& data, double eps_tilde);

/// Persist/restore any of the three models (formats in docs/formats.md).
void save_model(const std::filesystem::path& path, const CoefficientRegressor& model);
std::unique_ptr<CoefficientRegressor> load_model(const std::filesystem::path& path);

}  // namespace rbctl
