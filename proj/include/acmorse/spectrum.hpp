/// @file spectrum.hpp
/// Eigenvalue machinery: weighted eigensolves, inertia-based index counts,
/// the constant-solution index formula, the singular parameter set, and
/// first-order eigenvalue variation under metric perturbations.

#pragma once

#include <string>
#include <vector>

#include "acmorse/problem.hpp"

namespace acmorse {

/** Ascending eigenvalues of a weighted self-adjoint pencil with eigenfields. */
struct SpectrumResult {
  Eigen::VectorXd eigenvalues;           // lambda_0 <= lambda_1 <= ...
  std::vector<ScalarField> eigenfields;  // orthonormal in <.,.>_W
  double cluster_tol = 1e-6;             // relative merge tolerance

  /// Cluster id per eigenvalue: consecutive eigenvalues within
  /// cluster_tol * max(1, |lambda|) share an id (numerical multiplicity).
  std::vector<int> cluster_ids() const;
  int multiplicity(int i) const;
  bool is_simple(int i) const { return multiplicity(i) == 1; }
};

enum class EigenMethod { Auto, Dense, Iterative };

/// The m algebraically smallest eigenpairs of the pencil M x = lambda W x.
/// Dense solve at or below 2000 unknowns, shift-invert Lanczos with full
/// reorthogonalization above. Orthonormality and residual invariants are
/// verified before returning; non-convergence throws std::runtime_error.
SpectrumResult eigen_solve(const LinearOperator& op, int m, EigenMethod method = EigenMethod::Auto);

/// Spectrum of -Delta_g for the problem's metric (nonnegative, lambda_0 = 0).
SpectrumResult laplacian_spectrum(const Problem& prob, int m,
                                  EigenMethod method = EigenMethod::Auto);

struct InertiaResult {
  int index = 0;    // eigenvalues < -zero_tol
  int nullity = 0;  // |eigenvalue| <= zero_tol
  bool used_fallback = false;
  std::string note;  // set when the factorization path broke down
};

/// Index and nullity by symmetric-indefinite factorization inertia of the
/// shifted forms M -+ zero_tol W (Sylvester slicing; exact integers);
/// falls back to an eigensolve count if a factorization breaks down.
InertiaResult morse_index(const LinearOperator& H, double zero_tol);

struct IndexPair {
  int index = 0;
  int nullity = 0;
};

/// Index of the constant solution c from the Laplacian spectrum alone:
/// index = #{lambda : eps lambda < -f'(c)}, degenerate iff -f'(c)/eps is an
/// eigenvalue (within the shared zero tolerance). No Hessian is assembled.
/// Requires f(c) = 0 and a spectrum window reaching past -f'(c)/eps.
IndexPair constant_index(const Problem& prob, double c, const SpectrumResult& lap_spec);

struct SingularEpsilon {
  double epsilon;
  double zero_location;  // the constant c responsible
  double lambda;         // the Laplacian eigenvalue hit
};

/// Parameters eps = -f'(c)/lambda inside (eps_lo, eps_hi), over zeros c with
/// f'(c) < 0 and positive eigenvalues lambda; sorted, deduplicated.
std::vector<SingularEpsilon> singular_epsilons(const SpectrumResult& lap_spec, const Potential& p,
                                               double eps_lo, double eps_hi);

/// First-order variation of the tracked eigenvalue of the linearized operator
/// eps Delta_g - f'(u) under the metric family g + t A, evaluated through the
/// flux-form pairing: eps * <apply_perturbed_laplacian(A, phi0), phi0>_W.
/// No simplicity check; callers must know the perturbation respects the
/// eigenspace they track (e.g. symmetry-adapted bases).
double eigenvalue_derivative_unchecked(const Problem& prob, const SymTensorField& A,
                                       const ScalarField& phi0);

/// Checked variant: verifies phi0 is W-normalized, is an eigenfield of
/// -Delta_g, and that its eigenvalue is simple (cluster of size 1 within
/// cluster_tol); rejects otherwise. The value matches the central finite
/// difference of the tracked eigenvalue of the assembled family to O(t^2).
double eigenvalue_derivative(const Problem& prob, const SymTensorField& A,
                             const ScalarField& phi0);

}  // namespace acmorse
