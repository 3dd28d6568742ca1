#include "acmorse/operators.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace acmorse {

LinearOperator::LinearOperator(GridPtr grid,
                               std::shared_ptr<const Eigen::SparseMatrix<double>> form,
                               std::shared_ptr<const Eigen::VectorXd> weights)
    : grid_(std::move(grid)), form_(std::move(form)), weights_(std::move(weights)) {
  if (form_->rows() != form_->cols() || form_->rows() != weights_->size())
    throw std::invalid_argument("operator form/weight dimensions disagree");
}

Eigen::VectorXd LinearOperator::apply(const Eigen::VectorXd& u) const {
  return ((*form_) * u).cwiseQuotient(*weights_);
}

ScalarField LinearOperator::apply(const ScalarField& u) const {
  if (!u.grid->same_layout(*grid_))
    throw std::invalid_argument("field lives on a different grid than the operator");
  return ScalarField(grid_, apply(u.values));
}

double LinearOperator::form_product(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
  return u.dot((*form_) * v);
}

LinearOperator LinearOperator::shifted(double s) const {
  auto m = std::make_shared<Eigen::SparseMatrix<double>>(*form_);
  const Eigen::SparseMatrix<double> diag((s * (*weights_)).asDiagonal());
  *m += diag;
  return LinearOperator(grid_, std::move(m), weights_);
}

LinearOperator LinearOperator::scaled(double s) const {
  auto m = std::make_shared<Eigen::SparseMatrix<double>>(s * (*form_));
  return LinearOperator(grid_, std::move(m), weights_);
}

LinearOperator LinearOperator::plus_diagonal(const Eigen::VectorXd& extra) const {
  if (extra.size() != size()) throw std::invalid_argument("diagonal length mismatch");
  auto m = std::make_shared<Eigen::SparseMatrix<double>>(*form_);
  const Eigen::SparseMatrix<double> diag(extra.cwiseProduct(*weights_).asDiagonal());
  *m += diag;
  return LinearOperator(grid_, std::move(m), weights_);
}

double LinearOperator::gershgorin_bound() const {
  Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(size());
  for (int k = 0; k < form_->outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(*form_, k); it; ++it)
      rowsum[it.row()] += std::abs(it.value());
  return (rowsum.array() / weights_->array()).maxCoeff();
}

namespace {

// d/dt [ sqrt(det B(t)) * B(t)^{-1} ] at B(0)=B, B'(0)=Bdot:
//   sqrt(det B) * ( (1/2) tr(B^{-1} Bdot) B^{-1}  -  B^{-1} Bdot B^{-1} ).
Eigen::MatrixXd weighted_inverse_derivative(const Eigen::MatrixXd& B, const Eigen::MatrixXd& Bdot) {
  const Eigen::MatrixXd Binv = B.inverse();
  const double w = std::sqrt(B.determinant());
  return w * (0.5 * (Binv * Bdot).trace() * Binv - Binv * Bdot * Binv);
}

Eigen::MatrixXd weighted_inverse(const Eigen::MatrixXd& B) {
  return std::sqrt(B.determinant()) * B.inverse();
}

// Shared assembly of K (coefficients from the metric) or its derivative K'
// (coefficients differentiated in the direction A). Edge terms couple nodes
// along one axis through half-node coefficients; cross terms couple the
// centered differences of two distinct axes through node coefficients.
template <typename EdgeCoef, typename CrossCoef>
Eigen::SparseMatrix<double> assemble_form(const TorusGrid& grid, EdgeCoef edge_coef,
                                          CrossCoef cross_coef) {
  const int d = grid.dim();
  const std::int64_t n = grid.node_count();
  const double vol = grid.cell_volume();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(n) * (4 * d + 8 * d * (d - 1) / 2));

  for (int a = 0; a < d; ++a) {
    const double scale = vol / (grid.spacing(a) * grid.spacing(a));
    for (std::int64_t x = 0; x < n; ++x) {
      const std::int64_t y = grid.neighbor(x, a, +1);
      const double c = edge_coef(x, y, a) * scale;
      trips.emplace_back(x, x, c);
      trips.emplace_back(y, y, c);
      trips.emplace_back(x, y, -c);
      trips.emplace_back(y, x, -c);
    }
  }

  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      const double scale = vol / (4.0 * grid.spacing(a) * grid.spacing(b));
      for (std::int64_t x = 0; x < n; ++x) {
        const double c = cross_coef(x, a, b) * scale;
        if (c == 0.0) continue;
        for (int s = -1; s <= 1; s += 2)
          for (int t = -1; t <= 1; t += 2) {
            const std::int64_t xs = grid.neighbor(x, a, s);
            const std::int64_t xt = grid.neighbor(x, b, t);
            const double v = c * s * t;
            trips.emplace_back(xs, xt, v);
            trips.emplace_back(xt, xs, v);
          }
      }
    }

  Eigen::SparseMatrix<double> K(n, n);
  K.setFromTriplets(trips.begin(), trips.end());
  K.makeCompressed();
  return K;
}

}  // namespace

Eigen::SparseMatrix<double> stiffness_matrix(const TorusGrid& grid, const MetricField& metric) {
  return assemble_form(
      grid,
      [&](std::int64_t x, std::int64_t y, int a) {
        const Eigen::MatrixXd gbar = 0.5 * (metric.matrix_at(x) + metric.matrix_at(y));
        return weighted_inverse(gbar)(a, a);
      },
      [&](std::int64_t x, int a, int b) { return weighted_inverse(metric.matrix_at(x))(a, b); });
}

Eigen::SparseMatrix<double> stiffness_derivative(const TorusGrid& grid, const MetricField& metric,
                                                 const SymTensorField& A) {
  if (!A.grid()->same_layout(grid))
    throw std::invalid_argument("tensor field lives on a different grid");
  return assemble_form(
      grid,
      [&](std::int64_t x, std::int64_t y, int a) {
        const Eigen::MatrixXd gbar = 0.5 * (metric.matrix_at(x) + metric.matrix_at(y));
        const Eigen::MatrixXd abar = 0.5 * (A.matrix_at(x) + A.matrix_at(y));
        return weighted_inverse_derivative(gbar, abar)(a, a);
      },
      [&](std::int64_t x, int a, int b) {
        return weighted_inverse_derivative(metric.matrix_at(x), A.matrix_at(x))(a, b);
      });
}

LinearOperator assemble_laplace_beltrami(GridPtr grid, MetricPtr metric) {
  if (!metric->grid()->same_layout(*grid))
    throw std::invalid_argument("metric lives on a different grid");
  auto form = std::make_shared<Eigen::SparseMatrix<double>>(-stiffness_matrix(*grid, *metric));
  auto w = std::make_shared<Eigen::VectorXd>(metric->weights());
  return LinearOperator(std::move(grid), std::move(form), std::move(w));
}

double weighted_integral(const ScalarField& field, const MetricField& metric) {
  if (!field.grid->same_layout(*metric.grid()))
    throw std::invalid_argument("field and metric live on different grids");
  return field.values.dot(metric.weights());
}

ScalarField apply_perturbed_laplacian(const SymTensorField& A, const ScalarField& phi,
                                      const MetricField& metric) {
  if (!phi.grid->same_layout(*metric.grid()))
    throw std::invalid_argument("field and metric live on different grids");
  if (!A.trace_free())
    throw std::invalid_argument("perturbation tensor must be declared trace-free");
  const double defect = A.max_g_trace(metric);
  if (defect > 1e-12)
    throw std::invalid_argument("perturbation tensor is not trace-free: pointwise defect " +
                                std::to_string(defect));
  const Eigen::SparseMatrix<double> Kdot = stiffness_derivative(*phi.grid, metric, A);
  Eigen::VectorXd out = -(Kdot * phi.values).cwiseQuotient(metric.weights());
  return ScalarField(phi.grid, std::move(out));
}

}  // namespace acmorse
