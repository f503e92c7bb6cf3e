#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "rbctl/numerics.hpp"

namespace rbctl {

using SparseMat = Eigen::SparseMatrix<double>;

/// A point in the parameter box.
using Parameter = Vec;

/// Axis-aligned parameter box [lows, highs].
class ParameterDomain {
 public:
  ParameterDomain(Vec lows, Vec highs);

  Eigen::Index dim() const { return lows_.size(); }
  const Vec& lows() const { return lows_; }
  const Vec& highs() const { return highs_; }
  bool contains(const Parameter& mu) const;

 private:
  Vec lows_;
  Vec highs_;
};

/// Uniform grid on [0, T] with `steps` intervals.
struct TimeGrid {
  double final_time = 1.0;
  int steps = 1;

  TimeGrid() = default;
  TimeGrid(double T, int n_t);

  double dt() const { return final_time / steps; }
  double time(int k) const { return k * dt(); }
  int nodes() const { return steps + 1; }
};

/// Crank-Nicolson step matrices of one instance, factorized once.
struct StepOperators {
  SparseMat forward_explicit;   // I + dt/2 A
  SparseMat backward_explicit;  // I + dt/2 A^T
  Eigen::SparseLU<SparseMat, Eigen::COLAMDOrdering<int>> forward_implicit;   // I - dt/2 A
  Eigen::SparseLU<SparseMat, Eigen::COLAMDOrdering<int>> backward_implicit;  // I - dt/2 A^T
};

/// One fully specified linear-quadratic optimal control problem:
///   x' = A x + B u,  x(0) = x0,
///   J(u) = 1/2 <x(T) - xT, M (x(T) - xT)>_ip + 1/2 int_0^T u^T R u dt.
/// The state space carries `ip`; the control space is plain Euclidean.
/// Immutable after construction; the step factorizations are shared between
/// copies.
class ProblemInstance {
 public:
  ProblemInstance(SparseMat A, Mat B, Vec x0, Vec xT, Mat M, Mat R,
                  InnerProduct ip, TimeGrid grid);

  const SparseMat& A() const { return A_; }
  const Mat& B() const { return B_; }
  const Vec& x0() const { return x0_; }
  const Vec& xT() const { return xT_; }
  const Mat& M() const { return M_; }
  const Mat& R() const { return R_; }
  const InnerProduct& ip() const { return ip_; }
  const TimeGrid& grid() const { return grid_; }

  Eigen::Index state_dim() const { return A_.rows(); }
  Eigen::Index control_dim() const { return B_.cols(); }

  /// R^{-1} v via the stored Cholesky factor.
  Vec solve_R(const Vec& v) const;
  /// B* : X -> U with respect to ip on X and the Euclidean product on U,
  /// i.e. w * B^T p.
  Vec apply_B_adjoint(const Vec& p) const;

  const StepOperators& steps() const { return *steps_; }

 private:
  SparseMat A_;
  Mat B_;
  Vec x0_;
  Vec xT_;
  Mat M_;
  Mat R_;
  InnerProduct ip_;
  TimeGrid grid_;
  Eigen::LLT<Mat> R_llt_;
  std::shared_ptr<const StepOperators> steps_;
};

/// A parametrized problem: deterministic map from the parameter box to
/// instances.
struct ProblemFamily {
  std::string name;
  ParameterDomain domain;
  std::function<ProblemInstance(const Parameter&)> builder;

  ProblemInstance build(const Parameter& mu) const;
};

/// Heat equation on (0,1), Dirichlet boundary control at both ends.
/// mu = (conductivity, target slope), box [1,2] x [0.5,1.5].
ProblemFamily build_heat_family(int n_y = 100, double T = 0.1, int steps_per_point = 30);

/// Damped wave equation on (0,1) as a first-order system (position, velocity),
/// Dirichlet control at the right end. mu = squared wave speed, box [3,10].
ProblemFamily build_wave_family(int n_y = 100, double T = 1.0, int steps_per_point = 10,
                                double nu = 10.0);

/// tridiag(1, -2, 1) of size n.
SparseMat second_difference_matrix(int n);

/// Tensor-product grid with both endpoints per axis, row-major (last axis
/// fastest).
std::vector<Parameter> sample_grid(const ParameterDomain& domain,
                                   const std::vector<int>& counts);

/// i.i.d. uniform samples from the box, reproducible for a given seed.
/// Samples exactly equal to a member of `exclude` are redrawn.
std::vector<Parameter> sample_random(const ParameterDomain& domain, int count,
                                     std::uint64_t seed,
                                     const std::vector<Parameter>& exclude = {});

}  // namespace rbctl
