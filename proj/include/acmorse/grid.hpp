/// @file grid.hpp
/// Periodic uniform grids on flat tori (dimension 1-3), node-sampled scalar,
/// metric and symmetric-tensor fields.
///
/// Node ordering is lexicographic in the multi-index (i_0, ..., i_{d-1}) with
/// the last axis fastest; all serialization and linear algebra use this order.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace acmorse {

/** A uniform periodic grid on the flat torus prod_i (R / L_i Z). */
class TorusGrid {
 public:
  /// Validates dim in {1,2,3}, N_i >= 4, L_i > 0. Throws std::invalid_argument.
  static std::shared_ptr<const TorusGrid> make(int dim,
                                               const std::vector<double>& lengths,
                                               const std::vector<int>& sizes);

  int dim() const { return dim_; }
  std::int64_t node_count() const { return node_count_; }
  int size(int axis) const { return sizes_[axis]; }
  double length(int axis) const { return lengths_[axis]; }
  double spacing(int axis) const { return spacings_[axis]; }
  /// prod_i h_i, the volume carried by one node before metric weighting.
  double cell_volume() const { return cell_volume_; }
  /// prod_i L_i.
  double volume() const;

  std::int64_t flat_index(const std::array<int, 3>& multi) const;
  std::array<int, 3> multi_index(std::int64_t flat) const;
  /// Periodic neighbor: shift the multi-index by `step` along `axis`.
  std::int64_t neighbor(std::int64_t flat, int axis, int step) const;
  /// Coordinate of a node along one axis: x_a = i_a * h_a in [0, L_a).
  double coordinate(std::int64_t flat, int axis) const;

  /// Same dim, sizes and lengths (fields on layout-equal grids interoperate).
  bool same_layout(const TorusGrid& other) const;

 private:
  TorusGrid() = default;
  int dim_ = 0;
  std::array<int, 3> sizes_{};
  std::array<double, 3> lengths_{};
  std::array<double, 3> spacings_{};
  std::array<std::int64_t, 3> strides_{};
  std::int64_t node_count_ = 0;
  double cell_volume_ = 0.0;
};

using GridPtr = std::shared_ptr<const TorusGrid>;

/** A real-valued function sampled at grid nodes. */
struct ScalarField {
  GridPtr grid;
  Eigen::VectorXd values;

  ScalarField() = default;
  ScalarField(GridPtr g, Eigen::VectorXd v);

  static ScalarField constant(GridPtr g, double value);
  /// Samples fn(x) at node coordinates; fn receives a dim-long span of coords.
  static ScalarField from_function(
      GridPtr g, const std::function<double(const std::array<double, 3>&)>& fn);

  double sup_norm() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }
  /// Requires all entries finite; throws otherwise.
  void check_finite(const char* what) const;
};

/** Per-node symmetric positive definite d x d metric with cached weights. */
class MetricField {
 public:
  /// g(x) = identity everywhere.
  static std::shared_ptr<const MetricField> euclidean(GridPtr g);
  /// g(x) = c(x) * identity with a pointwise positive factor c.
  static std::shared_ptr<const MetricField> conformal(GridPtr g, const ScalarField& factor);
  /// Per-node dense symmetric matrices, row-major d*d each.
  /// Rejects non-SPD input with the offending node in the message.
  static std::shared_ptr<const MetricField> from_tensor(GridPtr g,
                                                        std::vector<double> components);

  const GridPtr& grid() const { return grid_; }
  int dim() const { return dim_; }
  Eigen::MatrixXd matrix_at(std::int64_t node) const;
  double sqrt_det(std::int64_t node) const { return sqrt_det_[node]; }
  /// Node weights w_x = sqrt(det g(x)) * prod_i h_i; the diagonal of W in
  /// the inner product <u,v> = u^T W v.
  const Eigen::VectorXd& weights() const { return weights_; }

 private:
  MetricField() = default;
  void finalize();  // validates SPD, caches sqrt_det and weights

  GridPtr grid_;
  int dim_ = 0;
  std::vector<double> comps_;  // node-major, row-major d*d blocks
  Eigen::VectorXd sqrt_det_;
  Eigen::VectorXd weights_;
};

using MetricPtr = std::shared_ptr<const MetricField>;

/** Per-node symmetric d x d tensor field (metric perturbation direction). */
class SymTensorField {
 public:
  /// Components node-major, row-major d*d blocks; symmetry enforced to 1e-12.
  SymTensorField(GridPtr g, std::vector<double> components, bool trace_free);

  const GridPtr& grid() const { return grid_; }
  int dim() const { return dim_; }
  bool trace_free() const { return trace_free_; }
  Eigen::MatrixXd matrix_at(std::int64_t node) const;
  /// max_x |g^{ij}(x) A_{ij}(x)|, the pointwise metric trace defect.
  double max_g_trace(const MetricField& metric) const;

 private:
  GridPtr grid_;
  int dim_ = 0;
  std::vector<double> comps_;
  bool trace_free_ = false;
};

/// Weighted inner product <u,v> = sum_x u(x) v(x) w(x).
double dot_w(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const Eigen::VectorXd& w);
double norm_w(const Eigen::VectorXd& u, const Eigen::VectorXd& w);

}  // namespace acmorse
