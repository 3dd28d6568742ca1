#include "acmorse/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace acmorse {

Problem Problem::make(GridPtr grid, MetricPtr metric, std::shared_ptr<const Potential> pot,
                      double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  Problem p;
  p.grid_ = grid;
  p.metric_ = metric;
  p.pot_ = std::move(pot);
  p.epsilon_ = epsilon;
  p.laplacian_ = assemble_laplace_beltrami(std::move(grid), std::move(metric));
  p.lap_gershgorin_ = p.laplacian_.gershgorin_bound();
  return p;
}

Problem Problem::with_epsilon(double epsilon) const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  Problem p = *this;
  p.epsilon_ = epsilon;
  return p;
}

ScalarField Problem::residual(const ScalarField& u) const {
  if (!u.grid->same_layout(*grid_)) throw std::invalid_argument("state on the wrong grid");
  Eigen::VectorXd r = -epsilon_ * laplacian_.apply(u.values);
  for (Eigen::Index i = 0; i < r.size(); ++i) r[i] += pot_->f(u.values[i]);
  return ScalarField(grid_, std::move(r));
}

double Problem::energy(const ScalarField& u) const {
  if (!u.grid->same_layout(*grid_)) throw std::invalid_argument("state on the wrong grid");
  // form() of the Laplacian is -K, so the Dirichlet term is -(eps/2) u' form u.
  const double dirichlet = -0.5 * epsilon_ * laplacian_.form_product(u.values, u.values);
  double bulk = 0.0;
  const Eigen::VectorXd& w = weights();
  for (Eigen::Index i = 0; i < u.values.size(); ++i) bulk += pot_->F(u.values[i]) * w[i];
  return dirichlet + bulk;
}

LinearOperator Problem::hessian(const ScalarField& u) const {
  if (!u.grid->same_layout(*grid_)) throw std::invalid_argument("state on the wrong grid");
  Eigen::VectorXd fp(u.values.size());
  for (Eigen::Index i = 0; i < fp.size(); ++i) fp[i] = pot_->fprime(u.values[i]);
  return laplacian_.scaled(-epsilon_).plus_diagonal(fp);
}

LinearOperator Problem::hessian_at_constant(double c) const {
  return laplacian_.scaled(-epsilon_).shifted(pot_->fprime(c));
}

double Problem::residual_norm(const ScalarField& u) const {
  return norm_w(residual(u).values, weights());
}

double Problem::hessian_zero_tol(const ScalarField& u) const {
  double fpmax = 0.0;
  for (Eigen::Index i = 0; i < u.values.size(); ++i)
    fpmax = std::max(fpmax, std::abs(pot_->fprime(u.values[i])));
  return 1e-8 * (1.0 + epsilon_ * lap_gershgorin_ + fpmax);
}

double Problem::hessian_zero_tol_constant(double c) const {
  return 1e-8 * (1.0 + epsilon_ * lap_gershgorin_ + std::abs(pot_->fprime(c)));
}

}  // namespace acmorse
