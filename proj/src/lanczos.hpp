/// @file lanczos.hpp
/// Internal shift-invert Lanczos driver for the symmetrized eigenproblem.

#pragma once

#include <cstdint>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace acmorse::detail {

/// Computes the m algebraically smallest eigenpairs of the sparse symmetric
/// matrix S. Shift-invert Lanczos with full reorthogonalization, deflated
/// restarts (to resolve multiplicities), and a final block Rayleigh-Ritz
/// refinement. Deterministic for a fixed seed.
/// Throws std::runtime_error if the iteration budget is exhausted.
void smallest_eigenpairs(const Eigen::SparseMatrix<double>& S, int m, Eigen::VectorXd& values,
                         Eigen::MatrixXd& vectors, std::uint64_t seed = 0x5eed);

}  // namespace acmorse::detail
