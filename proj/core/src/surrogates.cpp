#include "rbctl/surrogates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rbctl/errors.hpp"

namespace rbctl {

std::string to_string(RegressorKind kind) {
  switch (kind) {
    case RegressorKind::kernel: return "kernel";
    case RegressorKind::gpr: return "gpr";
    case RegressorKind::mlp: return "mlp";
  }
  return "unknown";
}

RegressorKind regressor_kind_from_string(const std::string& name) {
  if (name == "kernel" || name == "vkoga") return RegressorKind::kernel;
  if (name == "gpr") return RegressorKind::gpr;
  if (name == "mlp" || name == "dnn") return RegressorKind::mlp;
  throw std::invalid_argument("unknown surrogate kind: " + name);
}

ReducedSolution surrogate_online(const ProblemInstance& inst, const Parameter& mu,
                                 const ReducedBasis& basis, const CoefficientRegressor& model,
                                 bool certify) {
  if (model.output_dim() != basis.size()) {
    std::ostringstream msg;
    msg << "surrogate_online: model predicts " << model.output_dim()
        << " coefficients but the basis has " << basis.size() << " vectors";
    throw DimensionError(msg.str());
  }
  if (basis.state_dim() != inst.state_dim()) {
    throw DimensionError("surrogate_online: basis and instance dimensions differ");
  }
  ReducedSolution out;
  out.coeffs = model.predict(mu);
  out.phiT_approx = basis.combine(out.coeffs);
  out.control = control_from_adjoint(inst, solve_adjoint_backward(inst, out.phiT_approx));
  if (certify) out.estimated_error = error_estimator(inst, out.phiT_approx);
  return out;
}

double basis_operator_norm(const ReducedBasis& basis) {
  if (basis.vectors.empty()) return 0.0;
  const auto s = svd_singular_values(basis.vectors, basis.ip);
  return s.front();
}

AuditReport ml_error_bound_audit(const ReducedBasis& basis, const CoefficientRegressor& model,
                                 const TrainingData& data, double eps_tilde) {
  if (model.output_dim() != basis.size() || data.basis_size() != basis.size()) {
    throw DimensionError("ml_error_bound_audit: basis, model and data disagree on N");
  }
  AuditReport report;
  report.basis_norm = basis_operator_norm(basis);
  for (std::size_t i = 0; i < data.size(); ++i) {
    AuditRow row;
    row.mu = data.params[i];
    const Vec delta = data.coeffs[i] - model.predict(data.params[i]);
    row.coeff_error = delta.norm();
    row.adjoint_shift = normw(basis.combine(delta), basis.ip);
    row.bound = eps_tilde + report.basis_norm * row.coeff_error;
    if (row.adjoint_shift > report.basis_norm * row.coeff_error * (1.0 + 1e-10) + 1e-300) {
      report.shift_within_bound = false;
    }
    report.max_coeff_error = std::max(report.max_coeff_error, row.coeff_error);
    report.max_adjoint_shift = std::max(report.max_adjoint_shift, row.adjoint_shift);
    report.mean_coeff_error += row.coeff_error;
    report.mean_adjoint_shift += row.adjoint_shift;
    report.rows.push_back(std::move(row));
  }
  if (!report.rows.empty()) {
    report.mean_coeff_error /= static_cast<double>(report.rows.size());
    report.mean_adjoint_shift /= static_cast<double>(report.rows.size());
  }
  return report;
}

}  // namespace rbctl
