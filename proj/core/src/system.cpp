#include "rbctl/system.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "rbctl/errors.hpp"

namespace rbctl {

ParameterDomain::ParameterDomain(Vec lows, Vec highs)
    : lows_(std::move(lows)), highs_(std::move(highs)) {
  if (lows_.size() != highs_.size() || lows_.size() == 0) {
    throw DimensionError("ParameterDomain: lows and highs must have equal, positive length");
  }
  for (Eigen::Index i = 0; i < lows_.size(); ++i) {
    if (!(lows_[i] < highs_[i])) {
      throw std::invalid_argument("ParameterDomain: lows must be strictly below highs");
    }
  }
}

bool ParameterDomain::contains(const Parameter& mu) const {
  if (mu.size() != lows_.size()) return false;
  return (mu.array() >= lows_.array()).all() && (mu.array() <= highs_.array()).all();
}

TimeGrid::TimeGrid(double T, int n_t) : final_time(T), steps(n_t) {
  if (!(T > 0.0)) throw std::invalid_argument("TimeGrid: T must be positive");
  if (n_t < 1) throw std::invalid_argument("TimeGrid: need at least one step");
}

namespace {

SparseMat identity(Eigen::Index n) {
  SparseMat I(n, n);
  I.setIdentity();
  return I;
}

void check_symmetric(const Mat& S, const char* name) {
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument(std::string("ProblemInstance: ") + name + " is not symmetric");
  }
}

std::shared_ptr<const StepOperators> factorize_steps(const SparseMat& A, double dt) {
  auto ops = std::make_shared<StepOperators>();
  const SparseMat I = identity(A.rows());
  const SparseMat At = A.transpose();
  ops->forward_explicit = I + 0.5 * dt * A;
  ops->backward_explicit = I + 0.5 * dt * At;
  SparseMat fwd = I - 0.5 * dt * A;
  SparseMat bwd = I - 0.5 * dt * At;
  fwd.makeCompressed();
  bwd.makeCompressed();
  ops->forward_implicit.compute(fwd);
  ops->backward_implicit.compute(bwd);
  if (ops->forward_implicit.info() != Eigen::Success ||
      ops->backward_implicit.info() != Eigen::Success) {
    throw FactorizationError("Crank-Nicolson step matrix is singular");
  }
  return ops;
}

}  // namespace

ProblemInstance::ProblemInstance(SparseMat A, Mat B, Vec x0, Vec xT, Mat M, Mat R,
                                 InnerProduct ip, TimeGrid grid)
    : A_(std::move(A)),
      B_(std::move(B)),
      x0_(std::move(x0)),
      xT_(std::move(xT)),
      M_(std::move(M)),
      R_(std::move(R)),
      ip_(ip),
      grid_(grid) {
  const Eigen::Index n = A_.rows();
  if (A_.cols() != n || B_.rows() != n || x0_.size() != n || xT_.size() != n ||
      M_.rows() != n || M_.cols() != n || R_.rows() != B_.cols() || R_.cols() != B_.cols()) {
    throw DimensionError("ProblemInstance: inconsistent dimensions");
  }
  check_symmetric(M_, "M");
  check_symmetric(R_, "R");
  Eigen::SelfAdjointEigenSolver<Mat> m_eig(M_, Eigen::EigenvaluesOnly);
  if (m_eig.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, M_.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("ProblemInstance: M must be positive semi-definite");
  }
  R_llt_.compute(R_);
  if (R_llt_.info() != Eigen::Success) {
    throw std::invalid_argument("ProblemInstance: R must be positive definite");
  }
  A_.makeCompressed();
  steps_ = factorize_steps(A_, grid_.dt());
}

Vec ProblemInstance::solve_R(const Vec& v) const { return R_llt_.solve(v); }

Vec ProblemInstance::apply_B_adjoint(const Vec& p) const {
  return ip_.weight * (B_.transpose() * p);
}

ProblemInstance ProblemFamily::build(const Parameter& mu) const {
  if (mu.size() != domain.dim()) {
    std::ostringstream msg;
    msg << name << ": parameter has dimension " << mu.size() << ", expected " << domain.dim();
    throw DimensionError(msg.str());
  }
  return builder(mu);
}

SparseMat second_difference_matrix(int n) {
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(3 * static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    entries.emplace_back(i, i, -2.0);
    if (i > 0) entries.emplace_back(i, i - 1, 1.0);
    if (i + 1 < n) entries.emplace_back(i, i + 1, 1.0);
  }
  SparseMat D(n, n);
  D.setFromTriplets(entries.begin(), entries.end());
  return D;
}

ProblemFamily build_heat_family(int n_y, double T, int steps_per_point) {
  if (n_y < 2) throw std::invalid_argument("build_heat_family: n_y must be >= 2");
  const double h = 1.0 / (n_y + 1);
  const TimeGrid grid(T, steps_per_point * n_y);
  const SparseMat laplace = second_difference_matrix(n_y);

  Vec y(n_y);
  for (int i = 0; i < n_y; ++i) y[i] = (i + 1) * h;
  const Vec x0 = (std::numbers::pi * y.array()).sin().matrix();

  Mat R = Mat::Zero(2, 2);
  R(0, 0) = 0.125;
  R(1, 1) = 0.25;

  Vec lows(2), highs(2);
  lows << 1.0, 0.5;
  highs << 2.0, 1.5;

  auto builder = [=](const Parameter& mu) {
    const double scale = mu[0] / (h * h);
    Mat B = Mat::Zero(n_y, 2);
    B(0, 0) = scale;
    B(n_y - 1, 1) = scale;
    return ProblemInstance(SparseMat(scale * laplace), std::move(B), x0, mu[1] * y,
                           Mat::Identity(n_y, n_y), R, InnerProduct(h), grid);
  };
  return ProblemFamily{"heat", ParameterDomain(lows, highs), builder};
}

ProblemFamily build_wave_family(int n_y, double T, int steps_per_point, double nu) {
  if (n_y < 2) throw std::invalid_argument("build_wave_family: n_y must be >= 2");
  if (nu < 0.0) throw std::invalid_argument("build_wave_family: damping must be >= 0");
  const int n = 2 * n_y;
  const double h = 1.0 / (n_y + 1);
  const TimeGrid grid(T, steps_per_point * n_y);
  const SparseMat laplace = second_difference_matrix(n_y);

  Vec x0 = Vec::Zero(n);
  Vec xT = Vec::Zero(n);
  for (int i = 0; i < n_y; ++i) {
    const double y = (i + 1) * h;
    x0[i] = std::sin(std::numbers::pi * y);
    xT[i] = y;
  }
  const Mat R = Mat::Constant(1, 1, 0.1);

  auto builder = [=](const Parameter& mu) {
    const double scale = mu[0] / (h * h);
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(5 * static_cast<std::size_t>(n_y));
    for (int i = 0; i < n_y; ++i) {
      entries.emplace_back(i, n_y + i, 1.0);
      if (nu != 0.0) entries.emplace_back(n_y + i, n_y + i, -nu);
    }
    for (int k = 0; k < laplace.outerSize(); ++k) {
      for (SparseMat::InnerIterator it(laplace, k); it; ++it) {
        entries.emplace_back(n_y + it.row(), it.col(), scale * it.value());
      }
    }
    SparseMat A(n, n);
    A.setFromTriplets(entries.begin(), entries.end());
    Mat B = Mat::Zero(n, 1);
    B(n - 1, 0) = scale;
    return ProblemInstance(std::move(A), std::move(B), x0, xT, 10.0 * Mat::Identity(n, n), R,
                           InnerProduct(h), grid);
  };
  return ProblemFamily{"wave", ParameterDomain(Vec::Constant(1, 3.0), Vec::Constant(1, 10.0)),
                       builder};
}

std::vector<Parameter> sample_grid(const ParameterDomain& domain,
                                   const std::vector<int>& counts) {
  const auto p = static_cast<std::size_t>(domain.dim());
  if (counts.size() != p) throw DimensionError("sample_grid: one count per parameter axis");
  std::size_t total = 1;
  for (int c : counts) {
    if (c < 1) throw std::invalid_argument("sample_grid: counts must be >= 1");
    total *= static_cast<std::size_t>(c);
  }
  auto axis_value = [&](std::size_t axis, int idx) {
    const double lo = domain.lows()[static_cast<Eigen::Index>(axis)];
    const double hi = domain.highs()[static_cast<Eigen::Index>(axis)];
    if (counts[axis] == 1) return 0.5 * (lo + hi);
    return lo + (hi - lo) * idx / (counts[axis] - 1);
  };

  std::vector<Parameter> out;
  out.reserve(total);
  std::vector<int> idx(p, 0);
  for (std::size_t k = 0; k < total; ++k) {
    Parameter mu(static_cast<Eigen::Index>(p));
    for (std::size_t a = 0; a < p; ++a) mu[static_cast<Eigen::Index>(a)] = axis_value(a, idx[a]);
    out.push_back(std::move(mu));
    for (std::size_t a = p; a-- > 0;) {
      if (++idx[a] < counts[a]) break;
      idx[a] = 0;
    }
  }
  return out;
}

std::vector<Parameter> sample_random(const ParameterDomain& domain, int count,
                                     std::uint64_t seed,
                                     const std::vector<Parameter>& exclude) {
  if (count < 0) throw std::invalid_argument("sample_random: count must be >= 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Parameter> out;
  out.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(out.size()) < count) {
    Parameter mu(domain.dim());
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
      mu[i] = domain.lows()[i] + (domain.highs()[i] - domain.lows()[i]) * unit(rng);
    }
    const bool excluded = std::any_of(exclude.begin(), exclude.end(),
                                      [&](const Parameter& e) { return e == mu; });
    if (!excluded) out.push_back(std::move(mu));
  }
  return out;
}

}  // namespace rbctl
