/// @file problem.hpp
/// The semilinear problem on a metric torus: residual, energy, Hessian.
///
/// Sign convention, fixed once for the whole toolkit: the energy
///   E(u) = int (eps/2) |grad u|^2 + F(u) dVol
/// is minimized; its weighted gradient is the residual
///   R(u) = -eps Delta_g u + f(u),
/// the second variation is
///   H(u) = -eps Delta_g + f'(u),
/// and the Morse index of a solution counts the negative eigenvalues of H.
/// The eps/2 factor on the gradient term makes grad E = R exact (no constant
/// factors), so finite-difference gradient checks close to machine precision.
///
/// Discretely: E(u) = (eps/2) u^T K u + sum_x F(u_x) w_x and R = eps W^{-1}K u
/// + f(u), an exact identity, not an approximation.

#pragma once

#include <memory>

#include "acmorse/operators.hpp"
#include "acmorse/potential.hpp"

namespace acmorse {

class Problem {
 public:
  /// Assembles and caches the Laplacian once per (grid, metric).
  static Problem make(GridPtr grid, MetricPtr metric, std::shared_ptr<const Potential> pot,
                      double epsilon);
  /// Same geometry and potential, different epsilon; the cached operator is shared.
  Problem with_epsilon(double epsilon) const;

  double epsilon() const { return epsilon_; }
  const GridPtr& grid() const { return grid_; }
  const MetricPtr& metric() const { return metric_; }
  const Potential& potential() const { return *pot_; }
  std::shared_ptr<const Potential> potential_ptr() const { return pot_; }
  const LinearOperator& laplacian() const { return laplacian_; }
  const Eigen::VectorXd& weights() const { return laplacian_.weights(); }

  ScalarField residual(const ScalarField& u) const;
  double energy(const ScalarField& u) const;
  LinearOperator hessian(const ScalarField& u) const;
  /// Hessian at a constant state without assembling it elsewhere.
  LinearOperator hessian_at_constant(double c) const;

  double residual_norm(const ScalarField& u) const;
  /// Nullity threshold 1e-8 * (1 + |lambda_max|), with lambda_max the weighted
  /// Gershgorin bound of the Hessian pencil. Shared by the inertia and the
  /// spectral index paths so their integer outputs are comparable.
  double hessian_zero_tol(const ScalarField& u) const;
  double hessian_zero_tol_constant(double c) const;

 private:
  Problem() = default;
  GridPtr grid_;
  MetricPtr metric_;
  std::shared_ptr<const Potential> pot_;
  double epsilon_ = 0.0;
  LinearOperator laplacian_;
  double lap_gershgorin_ = 0.0;
};

}  // namespace acmorse
