/// @file operators.hpp
/// Discrete Laplace-Beltrami assembly on metric tori and the operator algebra
/// used everywhere downstream.
///
/// Discretization: conservative (flux-form) second-order finite differences.
/// The Dirichlet form  u^T K u  approximates  int <grad u, grad u>_g dVol with
///   - per-edge coefficients sqrt(det g) * g^{aa} averaged at half-nodes
///     (the full metric is averaged componentwise, then inverted), and
///   - off-diagonal g^{ab} terms by symmetrized centered cross-differences.
/// K is symmetric by construction and annihilates constants, so the operator
/// Delta = -W^{-1} K is exactly self-adjoint in <u,v> = u^T W v. Exactness of
/// this symmetry (not truncation order) is what makes Hessian inertia counts
/// meaningful, which is why the scheme is fixed here once.
///
/// Caveat: for strongly anisotropic metrics on coarse grids the symmetrized
/// cross-difference block can lose semidefiniteness; the assembly is intended
/// for mild metric perturbations of the Euclidean torus.

#pragma once

#include <memory>

#include <Eigen/Sparse>

#include "acmorse/grid.hpp"

namespace acmorse {

/**
 * A sparse operator that is self-adjoint in the weighted inner product.
 *
 * Stored as the pair (form matrix M, weight diagonal w): the operator acts as
 * Op u = W^{-1} M u with W = diag(w), and <u, Op v> = u^T M v. Eigenvalue
 * problems are the symmetric pencil M x = lambda W x.
 */
class LinearOperator {
 public:
  LinearOperator() = default;
  LinearOperator(GridPtr grid,
                 std::shared_ptr<const Eigen::SparseMatrix<double>> form,
                 std::shared_ptr<const Eigen::VectorXd> weights);

  Eigen::Index size() const { return weights_->size(); }
  const GridPtr& grid() const { return grid_; }
  const Eigen::SparseMatrix<double>& form() const { return *form_; }
  const Eigen::VectorXd& weights() const { return *weights_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
  ScalarField apply(const ScalarField& u) const;
  /// u^T M v, the weighted bilinear form <u, Op v>.
  double form_product(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;

  /// Pencil shift: operator + s * identity (form + s * W).
  LinearOperator shifted(double s) const;
  /// Pencil scale: s * operator.
  LinearOperator scaled(double s) const;
  /// Operator + diag(extra) in pencil terms (form + W * diag(extra)).
  LinearOperator plus_diagonal(const Eigen::VectorXd& extra) const;

  /// Upper bound on |eigenvalue| of the pencil, by weighted Gershgorin rows.
  double gershgorin_bound() const;

 private:
  GridPtr grid_;
  std::shared_ptr<const Eigen::SparseMatrix<double>> form_;
  std::shared_ptr<const Eigen::VectorXd> weights_;
};

/// Stiffness matrix K of the metric Dirichlet form (symmetric, K 1 = 0).
Eigen::SparseMatrix<double> stiffness_matrix(const TorusGrid& grid, const MetricField& metric);

/// Exact t-derivative of stiffness_matrix under the metric family g + t A.
/// Includes the half-node trace term: even when A is pointwise trace-free,
/// componentwise averaging to half-nodes does not preserve trace-freeness.
Eigen::SparseMatrix<double> stiffness_derivative(const TorusGrid& grid, const MetricField& metric,
                                                 const SymTensorField& A);

/// The Laplace-Beltrami operator Delta_g = -W^{-1} K: self-adjoint in the
/// weighted inner product, negative semidefinite, constants in the kernel.
LinearOperator assemble_laplace_beltrami(GridPtr grid, MetricPtr metric);

/// sum_x field(x) sqrt(det g(x)) prod_i h_i.
double weighted_integral(const ScalarField& field, const MetricField& metric);

/// The metric derivative of the Laplacian in the direction A applied to phi:
/// the discrete -div(A grad phi), in the same flux form as the assembly, so
/// <phi, result>_W equals int <A, grad phi x grad phi> dVol up to O(h^2).
/// Requires A trace-free w.r.t. the metric (pointwise defect <= 1e-12).
ScalarField apply_perturbed_laplacian(const SymTensorField& A, const ScalarField& phi,
                                      const MetricField& metric);

}  // namespace acmorse
