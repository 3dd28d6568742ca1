/// @file solver_internal.hpp
/// Shared linear-solve plumbing for the Newton-family solvers.

#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace acmorse::detail {

/// True when the factorization succeeded with trustworthy pivots.
bool ldlt_healthy(const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>& f);

/// Solve M s = rhs; near-singular factorizations retry with M + mu W for
/// growing mu (regularized is set when that path was taken).
bool solve_possibly_regularized(const Eigen::SparseMatrix<double>& M, const Eigen::VectorXd& w,
                                const Eigen::VectorXd& rhs, Eigen::VectorXd& s, bool& regularized);

}  // namespace acmorse::detail
