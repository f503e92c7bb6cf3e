#include "rbctl/greedy_rom.hpp"

#include <iostream>
#include <sstream>

#include <Eigen/Cholesky>

#include "rbctl/errors.hpp"
#include "rbctl/parallel.hpp"

namespace rbctl {

Vec ReducedBasis::combine(const Vec& coeffs) const {
  if (coeffs.size() != size()) throw DimensionError("ReducedBasis::combine: wrong coefficient count");
  if (vectors.empty()) throw std::invalid_argument("ReducedBasis::combine: empty basis");
  Vec out = Vec::Zero(state_dim());
  for (int i = 0; i < size(); ++i) out += coeffs[i] * vectors[static_cast<std::size_t>(i)];
  return out;
}

Mat ReducedBasis::matrix() const {
  Mat out(state_dim(), size());
  for (int i = 0; i < size(); ++i) out.col(i) = vectors[static_cast<std::size_t>(i)];
  return out;
}

Mat TrainingData::inputs() const {
  Mat out(static_cast<Eigen::Index>(size()), param_dim());
  for (std::size_t i = 0; i < size(); ++i) out.row(static_cast<Eigen::Index>(i)) = params[i].transpose();
  return out;
}

Mat TrainingData::targets() const {
  Mat out(static_cast<Eigen::Index>(size()), basis_size());
  for (std::size_t i = 0; i < size(); ++i) out.row(static_cast<Eigen::Index>(i)) = coeffs[i].transpose();
  return out;
}

Vec solve_normal_equations(const Mat& gram, const Vec& moments) {
  const Eigen::Index n = gram.rows();
  if (gram.cols() != n || moments.size() != n) {
    throw DimensionError("solve_normal_equations: shape mismatch");
  }
  Eigen::LLT<Mat> llt(gram);
  if (llt.info() == Eigen::Success) return llt.solve(moments);
  const double shift = 1e-14 * gram.trace() / static_cast<double>(n);
  llt.compute(gram + shift * Mat::Identity(n, n));
  if (llt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "normal equations are numerically singular for basis size N = " << n;
    throw FactorizationError(msg.str());
  }
  return llt.solve(moments);
}

double cheap_estimator_from_cache(const Vec& coeffs, const std::vector<Vec>& perturbed,
                                  const Vec& rhs, const InnerProduct& ip) {
  if (static_cast<std::size_t>(coeffs.size()) != perturbed.size()) {
    throw DimensionError("cheap_estimator_from_cache: coefficient count != cached states");
  }
  Vec residual = rhs;
  for (std::size_t i = 0; i < perturbed.size(); ++i) {
    residual -= coeffs[static_cast<Eigen::Index>(i)] * perturbed[i];
  }
  return normw(residual, ip);
}

namespace {

Mat gram_of(const std::vector<Vec>& xs, const InnerProduct& ip) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  Mat g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      g(i, j) = g(j, i) = dotw(xs[static_cast<std::size_t>(i)], xs[static_cast<std::size_t>(j)], ip);
    }
  }
  return g;
}

}  // namespace

Projection project_coefficients(const ProblemInstance& inst, const ReducedBasis& basis) {
  if (basis.vectors.empty()) throw std::invalid_argument("project_coefficients: empty basis");
  if (basis.state_dim() != inst.state_dim()) {
    throw DimensionError("project_coefficients: basis and instance dimensions differ");
  }
  Projection out;
  out.rhs = rhs_vector(inst);
  const Mat perturbed = apply_system_operator_batch(inst, basis.matrix());
  out.perturbed.reserve(basis.vectors.size());
  for (Eigen::Index i = 0; i < perturbed.cols(); ++i) out.perturbed.push_back(perturbed.col(i));
  Vec moments(basis.size());
  for (int i = 0; i < basis.size(); ++i) {
    moments[i] = dotw(out.perturbed[static_cast<std::size_t>(i)], out.rhs, inst.ip());
  }
  out.coeffs = solve_normal_equations(gram_of(out.perturbed, inst.ip()), moments);
  return out;
}

ReducedSolution rom_online(const ProblemInstance& inst, const ReducedBasis& basis, bool certify) {
  Projection proj = project_coefficients(inst, basis);
  ReducedSolution out;
  out.phiT_approx = basis.combine(proj.coeffs);
  out.control = control_from_adjoint(inst, solve_adjoint_backward(inst, out.phiT_approx));
  if (certify) {
    out.estimated_error =
        cheap_estimator_from_cache(proj.coeffs, proj.perturbed, proj.rhs, inst.ip());
  }
  out.coeffs = std::move(proj.coeffs);
  return out;
}

namespace {

// Everything the greedy keeps per training parameter between sweeps.
struct TrainingPoint {
  ProblemInstance inst;
  Vec rhs;
  std::vector<Vec> perturbed;
  Mat gram;
  Vec moments;
  Vec coeffs;
  double estimate = 0.0;
};

void extend_point(TrainingPoint& pt, const Vec& new_vector) {
  const InnerProduct& ip = pt.inst.ip();
  Vec x_new = apply_system_operator(pt.inst, new_vector);
  const auto k = static_cast<Eigen::Index>(pt.perturbed.size());
  Mat gram(k + 1, k + 1);
  gram.topLeftCorner(k, k) = pt.gram;
  for (Eigen::Index i = 0; i < k; ++i) {
    gram(k, i) = gram(i, k) = dotw(x_new, pt.perturbed[static_cast<std::size_t>(i)], ip);
  }
  gram(k, k) = dotw(x_new, x_new, ip);
  Vec moments(k + 1);
  moments.head(k) = pt.moments;
  moments[k] = dotw(x_new, pt.rhs, ip);
  pt.perturbed.push_back(std::move(x_new));
  pt.gram = std::move(gram);
  pt.moments = std::move(moments);
  pt.coeffs = solve_normal_equations(pt.gram, pt.moments);
  pt.estimate = cheap_estimator_from_cache(pt.coeffs, pt.perturbed, pt.rhs, ip);
}

}  // namespace

GreedyResult greedy_offline(const ProblemFamily& family, const std::vector<Parameter>& train_set,
                            const GreedyOptions& opts) {
  if (train_set.empty()) throw std::invalid_argument("greedy_offline: empty training set");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("greedy_offline: tol must be positive");
  if (opts.max_basis < 1) throw std::invalid_argument("greedy_offline: max_basis must be >= 1");
  auto warn = opts.warn ? opts.warn
                        : std::function<void(const std::string&)>(
                              [](const std::string& m) { std::cerr << "warning: " << m << '\n'; });

  const std::size_t n_train = train_set.size();
  std::vector<std::optional<TrainingPoint>> slots(n_train);
  parallel_for(n_train, opts.threads, [&](std::size_t j) {
    ProblemInstance inst = family.build(train_set[j]);
    Vec rhs = rhs_vector(inst);
    const double estimate = normw(rhs, inst.ip());
    slots[j].emplace(TrainingPoint{std::move(inst), std::move(rhs), {}, Mat(0, 0), Vec(0), Vec(0),
                                   estimate});
  });
  std::vector<TrainingPoint> points;
  points.reserve(n_train);
  for (auto& s : slots) points.push_back(std::move(*s));
  slots.clear();

  GreedyResult result;
  ReducedBasis& basis = result.basis;
  basis.family = family.name;
  basis.ip = points.front().inst.ip();
  basis.tolerance_used = opts.tol;

  if (opts.track_true_errors) {
    result.exact_adjoints.resize(n_train);
    parallel_for(n_train, opts.threads, [&](std::size_t j) {
      result.exact_adjoints[j] = solve_final_adjoint(points[j].inst, points[j].rhs, opts.exact).solution;
    });
  }

  std::vector<bool> excluded(n_train, false);
  while (true) {
    GreedyRecord rec;
    rec.basis_size = basis.size();
    for (std::size_t j = 0; j < n_train; ++j) {
      if (excluded[j]) continue;
      if (rec.selected_index < 0 || points[j].estimate > rec.max_estimate) {
        rec.selected_index = static_cast<int>(j);
        rec.max_estimate = points[j].estimate;
      }
    }
    if (opts.track_true_errors) {
      double worst = 0.0;
      for (std::size_t j = 0; j < n_train; ++j) {
        const Vec approx = basis.vectors.empty() ? Vec::Zero(points[j].rhs.size())
                                                 : basis.combine(points[j].coeffs);
        worst = std::max(worst, normw(result.exact_adjoints[j] - approx, basis.ip));
      }
      rec.max_true_error = worst;
    }
    if (rec.selected_index < 0) {
      throw GreedyIncompleteError(
          "greedy_offline: every remaining training snapshot was rejected as dependent", basis);
    }
    basis.history.push_back(rec);
    if (opts.on_record) opts.on_record(rec);
    if (rec.max_estimate <= opts.tol) break;
    if (basis.size() >= opts.max_basis) {
      std::ostringstream msg;
      msg << "greedy_offline: reached max_basis = " << opts.max_basis
          << " with estimated max error " << rec.max_estimate << " > tol " << opts.tol;
      throw GreedyIncompleteError(msg.str(), basis);
    }

    const auto star = static_cast<std::size_t>(rec.selected_index);
    const Vec snapshot = opts.track_true_errors
                             ? result.exact_adjoints[star]
                             : solve_final_adjoint(points[star].inst, points[star].rhs, opts.exact).solution;
    std::optional<Vec> added = gram_schmidt_extend(basis.vectors, snapshot, basis.ip);
    if (!added) {
      std::ostringstream msg;
      msg << "snapshot at training index " << star << " is numerically dependent on the basis;"
          << " excluding it from further selection";
      warn(msg.str());
      excluded[star] = true;
      result.rejected.push_back(rec.selected_index);
      basis.history.pop_back();
      continue;
    }
    basis.vectors.push_back(*added);
    basis.selected_params.push_back(train_set[star]);
    parallel_for(n_train, opts.threads, [&](std::size_t j) { extend_point(points[j], *added); });
  }

  result.data.params = train_set;
  result.data.coeffs.reserve(n_train);
  for (const TrainingPoint& pt : points) result.data.coeffs.push_back(pt.coeffs);
  return result;
}

}  // namespace rbctl
