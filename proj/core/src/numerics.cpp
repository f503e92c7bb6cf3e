#include "rbctl/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rbctl/errors.hpp"

namespace rbctl {

InnerProduct::InnerProduct(double w) : weight(w) {
  if (!(w > 0.0) || !std::isfinite(w)) {
    throw std::invalid_argument("inner product weight must be positive");
  }
}

double dotw(const Vec& x, const Vec& y, const InnerProduct& ip) {
  if (x.size() != y.size()) {
    std::ostringstream msg;
    msg << "dotw: dimension mismatch (" << x.size() << " vs " << y.size() << ")";
    throw DimensionError(msg.str());
  }
  return ip.weight * x.dot(y);
}

double normw(const Vec& x, const InnerProduct& ip) {
  return std::sqrt(ip.weight) * x.norm();
}

CgResult cg_solve(const LinearOperator& apply, const Vec& b,
                  const InnerProduct& ip, double tol, int max_iter,
                  bool reorthogonalize) {
  if (!(tol > 0.0)) throw std::invalid_argument("cg_solve: tol must be positive");

  CgResult out;
  out.solution = Vec::Zero(b.size());
  Vec r = b;
  double rnorm = normw(r, ip);
  if (rnorm <= tol) {
    out.residual_norm = rnorm;
    return out;
  }

  Vec& x = out.solution;
  Vec p = r;
  double rr = dotw(r, r, ip);
  Vec best = x;
  double best_norm = rnorm;
  // Normalized residual history; only filled when reorthogonalizing.
  std::vector<Vec> directions;
  if (reorthogonalize) directions.push_back(r / rnorm);

  for (int it = 1; it <= max_iter; ++it) {
    const Vec ap = apply(p);
    if (ap.size() != b.size()) throw DimensionError("cg_solve: operator changed dimension");
    const double pap = dotw(p, ap, ip);
    if (!(pap > 0.0)) {
      throw ConvergenceError("cg_solve: operator is not positive definite", best,
                             best_norm, it);
    }
    const double alpha = rr / pap;
    x += alpha * p;
    r -= alpha * ap;
    out.iterations = it;

    if (normw(r, ip) <= tol) {
      // The recursive residual can drift from b - A x; confirm before returning.
      Vec true_r = b - apply(x);
      const double true_norm = normw(true_r, ip);
      if (true_norm < best_norm) {
        best = x;
        best_norm = true_norm;
      }
      if (true_norm <= tol) {
        out.residual_norm = true_norm;
        return out;
      }
      r = std::move(true_r);
      rr = dotw(r, r, ip);
      p = r;
      directions.clear();
      if (reorthogonalize) directions.push_back(r / std::sqrt(rr));
      continue;
    }

    if (reorthogonalize) {
      // Residuals of exact CG are mutually orthogonal; enforce it explicitly.
      for (const Vec& q : directions) r -= dotw(q, r, ip) * q;
      if (static_cast<Eigen::Index>(directions.size()) >= b.size()) directions.clear();
    }
    const double rr_new = dotw(r, r, ip);
    if (reorthogonalize) directions.push_back(r / std::sqrt(rr_new));
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }

  const double last_norm = normw(b - apply(x), ip);
  if (last_norm < best_norm) {
    best = x;
    best_norm = last_norm;
  }
  std::ostringstream msg;
  msg << "cg_solve: no convergence after " << max_iter
      << " iterations (residual " << best_norm << ", tol " << tol << ")";
  throw ConvergenceError(msg.str(), best, best_norm, max_iter);
}

std::optional<Vec> gram_schmidt_extend(std::span<const Vec> basis, const Vec& v,
                                       const InnerProduct& ip, double drop_tol) {
  const double vnorm = normw(v, ip);
  if (vnorm == 0.0) return std::nullopt;
  Vec w = v;
  for (int pass = 0; pass < 2; ++pass) {
    for (const Vec& b : basis) {
      w -= dotw(b, w, ip) * b;
    }
  }
  const double wnorm = normw(w, ip);
  if (wnorm < drop_tol * vnorm) return std::nullopt;
  w /= wnorm;
  return w;
}

double trapezoid_quad(std::span<const double> values, double dt) {
  if (values.size() < 2) throw std::invalid_argument("trapezoid_quad: need at least two values");
  double sum = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) sum += values[i];
  return dt * sum;
}

std::vector<double> svd_singular_values(std::span<const Vec> columns,
                                        const InnerProduct& ip) {
  if (columns.empty()) throw std::invalid_argument("svd_singular_values: no columns");
  const Eigen::Index n = columns.front().size();
  Mat snapshots(n, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != n) throw DimensionError("svd_singular_values: ragged columns");
    snapshots.col(static_cast<Eigen::Index>(j)) = columns[j];
  }
  snapshots *= std::sqrt(ip.weight);
  Eigen::BDCSVD<Mat> svd(snapshots);
  const Vec& s = svd.singularValues();
  std::vector<double> out(s.data(), s.data() + s.size());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

}  // namespace rbctl
