#include "acmorse/grid.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace acmorse {

namespace {

std::string node_label(const TorusGrid& g, std::int64_t flat) {
  auto m = g.multi_index(flat);
  std::ostringstream os;
  os << "(";
  for (int a = 0; a < g.dim(); ++a) os << (a ? "," : "") << m[a];
  os << ")";
  return os.str();
}

}  // namespace

std::shared_ptr<const TorusGrid> TorusGrid::make(int dim,
                                                 const std::vector<double>& lengths,
                                                 const std::vector<int>& sizes) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("grid dimension must be 1, 2 or 3");
  if (static_cast<int>(lengths.size()) != dim || static_cast<int>(sizes.size()) != dim)
    throw std::invalid_argument("grid lengths/sizes must each have dim entries");
  auto g = std::shared_ptr<TorusGrid>(new TorusGrid());
  g->dim_ = dim;
  g->node_count_ = 1;
  g->cell_volume_ = 1.0;
  for (int a = 0; a < dim; ++a) {
    if (!(lengths[a] > 0.0)) throw std::invalid_argument("grid period lengths must be positive");
    if (sizes[a] < 4) throw std::invalid_argument("grid needs at least 4 nodes per axis");
    g->lengths_[a] = lengths[a];
    g->sizes_[a] = sizes[a];
    g->spacings_[a] = lengths[a] / sizes[a];
    g->node_count_ *= sizes[a];
    g->cell_volume_ *= g->spacings_[a];
  }
  for (int a = dim - 1; a >= 0; --a)
    g->strides_[a] = (a == dim - 1) ? 1 : g->strides_[a + 1] * g->sizes_[a + 1];
  return g;
}

double TorusGrid::volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= lengths_[a];
  return v;
}

std::int64_t TorusGrid::flat_index(const std::array<int, 3>& multi) const {
  std::int64_t f = 0;
  for (int a = 0; a < dim_; ++a) f += static_cast<std::int64_t>(multi[a]) * strides_[a];
  return f;
}

std::array<int, 3> TorusGrid::multi_index(std::int64_t flat) const {
  std::array<int, 3> m{};
  for (int a = 0; a < dim_; ++a) m[a] = static_cast<int>((flat / strides_[a]) % sizes_[a]);
  return m;
}

std::int64_t TorusGrid::neighbor(std::int64_t flat, int axis, int step) const {
  const int n = sizes_[axis];
  const int i = static_cast<int>((flat / strides_[axis]) % n);
  int j = (i + step) % n;
  if (j < 0) j += n;
  return flat + static_cast<std::int64_t>(j - i) * strides_[axis];
}

double TorusGrid::coordinate(std::int64_t flat, int axis) const {
  return static_cast<double>((flat / strides_[axis]) % sizes_[axis]) * spacings_[axis];
}

bool TorusGrid::same_layout(const TorusGrid& other) const {
  if (dim_ != other.dim_) return false;
  for (int a = 0; a < dim_; ++a)
    if (sizes_[a] != other.sizes_[a] || lengths_[a] != other.lengths_[a]) return false;
  return true;
}

ScalarField::ScalarField(GridPtr g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
  if (!grid) throw std::invalid_argument("scalar field needs a grid");
  if (values.size() != grid->node_count())
    throw std::invalid_argument("scalar field length does not match the grid node count");
}

ScalarField ScalarField::constant(GridPtr g, double value) {
  Eigen::VectorXd v = Eigen::VectorXd::Constant(g->node_count(), value);
  return ScalarField(std::move(g), std::move(v));
}

ScalarField ScalarField::from_function(
    GridPtr g, const std::function<double(const std::array<double, 3>&)>& fn) {
  Eigen::VectorXd v(g->node_count());
  std::array<double, 3> x{};
  for (std::int64_t i = 0; i < g->node_count(); ++i) {
    for (int a = 0; a < g->dim(); ++a) x[a] = g->coordinate(i, a);
    v[i] = fn(x);
  }
  return ScalarField(std::move(g), std::move(v));
}

void ScalarField::check_finite(const char* what) const {
  if (!values.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

std::shared_ptr<const MetricField> MetricField::euclidean(GridPtr g) {
  auto m = std::shared_ptr<MetricField>(new MetricField());
  m->grid_ = std::move(g);
  m->dim_ = m->grid_->dim();
  const int d = m->dim_;
  m->comps_.assign(static_cast<std::size_t>(m->grid_->node_count()) * d * d, 0.0);
  for (std::int64_t i = 0; i < m->grid_->node_count(); ++i)
    for (int a = 0; a < d; ++a) m->comps_[static_cast<std::size_t>(i) * d * d + a * d + a] = 1.0;
  m->finalize();
  return m;
}

std::shared_ptr<const MetricField> MetricField::conformal(GridPtr g, const ScalarField& factor) {
  if (!factor.grid->same_layout(*g))
    throw std::invalid_argument("conformal factor lives on a different grid");
  factor.check_finite("conformal factor");
  auto m = std::shared_ptr<MetricField>(new MetricField());
  m->grid_ = std::move(g);
  m->dim_ = m->grid_->dim();
  const int d = m->dim_;
  m->comps_.assign(static_cast<std::size_t>(m->grid_->node_count()) * d * d, 0.0);
  for (std::int64_t i = 0; i < m->grid_->node_count(); ++i)
    for (int a = 0; a < d; ++a)
      m->comps_[static_cast<std::size_t>(i) * d * d + a * d + a] = factor.values[i];
  m->finalize();
  return m;
}

std::shared_ptr<const MetricField> MetricField::from_tensor(GridPtr g,
                                                            std::vector<double> components) {
  auto m = std::shared_ptr<MetricField>(new MetricField());
  m->grid_ = std::move(g);
  m->dim_ = m->grid_->dim();
  const int d = m->dim_;
  if (components.size() != static_cast<std::size_t>(m->grid_->node_count()) * d * d)
    throw std::invalid_argument("metric component array has the wrong length");
  m->comps_ = std::move(components);
  // Symmetrize exactly; reject asymmetry beyond roundoff.
  for (std::int64_t i = 0; i < m->grid_->node_count(); ++i) {
    double* blk = &m->comps_[static_cast<std::size_t>(i) * d * d];
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b) {
        const double s = 0.5 * (blk[a * d + b] + blk[b * d + a]);
        if (std::abs(blk[a * d + b] - blk[b * d + a]) > 1e-12 * (1.0 + std::abs(s)))
          throw std::invalid_argument("metric tensor not symmetric at node " +
                                      node_label(*m->grid_, i));
        blk[a * d + b] = blk[b * d + a] = s;
      }
  }
  m->finalize();
  return m;
}

void MetricField::finalize() {
  const int d = dim_;
  const std::int64_t n = grid_->node_count();
  sqrt_det_.resize(n);
  weights_.resize(n);
  Eigen::MatrixXd gm(d, d);
  for (std::int64_t i = 0; i < n; ++i) {
    const double* blk = &comps_[static_cast<std::size_t>(i) * d * d];
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) gm(a, b) = blk[a * d + b];
    if (!gm.allFinite())
      throw std::invalid_argument("metric has non-finite entries at node " +
                                  node_label(*grid_, i));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gm);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
      throw std::invalid_argument("metric not positive definite at node " +
                                  node_label(*grid_, i));
    sqrt_det_[i] = std::sqrt(gm.determinant());
    weights_[i] = sqrt_det_[i] * grid_->cell_volume();
  }
}

Eigen::MatrixXd MetricField::matrix_at(std::int64_t node) const {
  const int d = dim_;
  Eigen::MatrixXd gm(d, d);
  const double* blk = &comps_[static_cast<std::size_t>(node) * d * d];
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) gm(a, b) = blk[a * d + b];
  return gm;
}

SymTensorField::SymTensorField(GridPtr g, std::vector<double> components, bool trace_free)
    : grid_(std::move(g)), dim_(grid_->dim()), comps_(std::move(components)),
      trace_free_(trace_free) {
  const int d = dim_;
  if (comps_.size() != static_cast<std::size_t>(grid_->node_count()) * d * d)
    throw std::invalid_argument("tensor component array has the wrong length");
  for (std::int64_t i = 0; i < grid_->node_count(); ++i) {
    double* blk = &comps_[static_cast<std::size_t>(i) * d * d];
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b) {
        const double s = 0.5 * (blk[a * d + b] + blk[b * d + a]);
        if (std::abs(blk[a * d + b] - blk[b * d + a]) > 1e-12 * (1.0 + std::abs(s)))
          throw std::invalid_argument("tensor field not symmetric at node " +
                                      node_label(*grid_, i));
        blk[a * d + b] = blk[b * d + a] = s;
      }
  }
}

Eigen::MatrixXd SymTensorField::matrix_at(std::int64_t node) const {
  const int d = dim_;
  Eigen::MatrixXd am(d, d);
  const double* blk = &comps_[static_cast<std::size_t>(node) * d * d];
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) am(a, b) = blk[a * d + b];
  return am;
}

double SymTensorField::max_g_trace(const MetricField& metric) const {
  if (!metric.grid()->same_layout(*grid_))
    throw std::invalid_argument("tensor and metric live on different grids");
  double worst = 0.0;
  for (std::int64_t i = 0; i < grid_->node_count(); ++i) {
    const Eigen::MatrixXd ginv = metric.matrix_at(i).inverse();
    const double tr = (ginv * matrix_at(i)).trace();
    worst = std::max(worst, std::abs(tr));
  }
  return worst;
}

double dot_w(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
  return (u.array() * v.array() * w.array()).sum();
}

double norm_w(const Eigen::VectorXd& u, const Eigen::VectorXd& w) {
  return std::sqrt((u.array().square() * w.array()).sum());
}

}  // namespace acmorse
