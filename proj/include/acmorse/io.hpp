/// @file io.hpp
/// File formats: field / spectrum / branch / trajectory CSV, plain text and
/// JSON report writing, and the deterministic SVG branch diagram. All
/// numbers are printed with %.17g so outputs round-trip and identical runs
/// produce byte-identical files.

#pragma once

#include <string>
#include <vector>

#include "acmorse/flow.hpp"
#include "acmorse/grid.hpp"
#include "acmorse/solver.hpp"
#include "acmorse/spectrum.hpp"

namespace acmorse {

/// One row per node in lexicographic order: multi-index columns then the
/// value; header i0[,i1[,i2]],value.
void write_field_csv(const std::string& path, const ScalarField& u);

/// Reads a field written by write_field_csv onto `grid`; validates the
/// header, the row count, and every row's multi-index against the grid's
/// lexicographic order. Throws std::invalid_argument with the offending
/// line on any mismatch.
ScalarField read_field_csv(const std::string& path, const GridPtr& grid);

/// Symmetric-tensor-valued metric: same row order, value columns are the
/// upper triangle row-major (d=2: g00,g01,g11). Builds the SPD metric or
/// throws through MetricField validation.
MetricPtr read_tensor_metric_csv(const std::string& path, const GridPtr& grid);

/// index,eigenvalue,cluster rows.
void write_spectrum_csv(const std::string& path, const SpectrumResult& spec);

/// arclength,epsilon,supnorm,energy,index,nullity,event rows; event holds
/// the event kind when one was localized at that point, else empty.
void write_branch_csv(const std::string& path, const Branch& branch);

/// t,energy,supnorm,nearest rows; nearest is the weighted distance to the
/// closest member of `known` (empty list: column fixed at 0).
void write_trajectory_csv(const std::string& path, const Trajectory& tr,
                          const std::vector<SolutionPoint>& known, const Eigen::VectorXd& w);

void write_text_file(const std::string& path, const std::string& content);

/// Bifurcation diagram: epsilon on the abscissa, sup-norm signed by the
/// weighted inner product with `sign_field` on the ordinate, points colored
/// by Morse index (8-color cycle), one polyline per branch. Pure function of
/// its inputs; no timestamps.
std::string branch_diagram_svg(const std::vector<Branch>& branches,
                               const Eigen::VectorXd& sign_field, const Eigen::VectorXd& w);

/// %.17g rendering used by every writer.
std::string format_full(double x);

}  // namespace acmorse
