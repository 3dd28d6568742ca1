/// @file solver.hpp
/// Zero-finding and branch structure for the stationary equation:
/// damped Newton, deflated multi-solution search, pseudo-arclength
/// continuation with event localization, branch switching at kernel
/// directions, and the bifurcation-structure verifier.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "acmorse/problem.hpp"
#include "acmorse/rng.hpp"
#include "acmorse/spectrum.hpp"

namespace acmorse {

/// A classified zero of the residual at a fixed epsilon.
struct SolutionPoint {
  double epsilon = 0.0;
  ScalarField u;
  double residual_norm = 0.0;
  int index = 0;    // negative Hessian eigenvalues
  int nullity = 0;  // |eigenvalue| within the shared zero tolerance
  double energy = 0.0;
  std::string tag;  // origin: "constant c", branch id, seed ordinal, ...
};

/// Residual norm, Hessian inertia (shared zero tolerance), and energy of u.
SolutionPoint classify_solution(const Problem& prob, const ScalarField& u, std::string tag);

struct NewtonOptions {
  double tol = 1e-10;      // weighted residual norm at acceptance
  int max_iter = 50;
  double armijo_c = 1e-4;  // sufficient-decrease constant
  double backtrack = 0.5;
  double min_step = 1e-6;  // line-search floor before declaring a stall
};

struct NewtonResult {
  bool converged = false;
  SolutionPoint point;  // classified only when converged
  int iterations = 0;
  bool regularized = false;  // a singular Hessian forced a shifted solve
  std::string failure;       // reason when not converged
};

/// Damped Newton on the residual with Armijo backtracking on the weighted
/// residual norm. Linear solves use a sparse symmetric-indefinite
/// factorization of the Hessian form; a breakdown retries with H + mu I for
/// growing mu and records it. States escaping sup-norm 10 T0 are declared
/// divergent. A start that already satisfies the tolerance returns in zero
/// iterations.
NewtonResult newton_solve(const Problem& prob, const ScalarField& u0, std::string tag = "",
                          const NewtonOptions& opt = {});

struct DeflationOptions {
  int max_iter = 100;
  double distinct_tol = 1e-4;  // weighted L2 distance that counts as a new solution
  double amplitude_lo = 0.1;   // seed sup-norm range, in units of T0
  double amplitude_hi = 1.2;
  int max_mode = 3;  // band limit of random seed fields
  NewtonOptions newton;
};

/// Newton on the deflated residual R(u) * prod_{u*} (1/|u - u*|_W^2 + 1)
/// from random band-limited seeds; the product ranges over `known` plus
/// everything found so far, so reconvergence to old solutions is repelled.
/// Accepts a state when its UNdeflated residual meets the Newton tolerance
/// and it is farther than distinct_tol from every anchor. Seeds run
/// sequentially in a fixed order: the result list is deterministic in
/// (rng_seed, seeds). Returns only the new solutions.
std::vector<SolutionPoint> deflated_search(const Problem& prob,
                                           const std::vector<SolutionPoint>& known, int seeds,
                                           std::uint64_t rng_seed,
                                           const DeflationOptions& opt = {});

/// Fixed-epsilon sweep: the constants at the potential's zeros, a deflated
/// random search on top, then (for odd potentials) closure under u -> -u.
/// Output is deduplicated at the deflation distinctness tolerance.
std::vector<SolutionPoint> solution_sweep(const Problem& prob, int seeds, std::uint64_t rng_seed,
                                          const DeflationOptions& opt = {});

/// Position and weighted L2 distance of the set member closest to u.
/// Returns (set.size(), +inf) on an empty set.
std::pair<std::size_t, double> nearest_solution(const std::vector<SolutionPoint>& set,
                                                const ScalarField& u, const Eigen::VectorXd& w);

struct BranchEvent {
  double arclength = 0.0;
  std::string kind;     // fold | branch-point | index-change | stall
  double eps_lo = 0.0;  // epsilon bracket when the event was localized
  double eps_hi = 0.0;
  int index_before = 0;
  int index_after = 0;
  std::string note;
};

struct Branch {
  std::vector<SolutionPoint> points;  // arclength-ordered
  std::vector<double> arclengths;     // matching points, starting at 0
  std::vector<BranchEvent> events;
  std::string tag;
};

struct StepControl {
  double ds0 = 1e-2;   // initial arclength step
  double ds_min = 1e-8;
  double ds_max = 1e-1;
  double grow = 1.3;   // step growth after fast corrector convergence
  int max_steps = 2000;
  int max_corrector = 10;
  double bracket_width = 1e-6;  // epsilon resolution of localized events
  NewtonOptions newton;         // used for event bisection re-solves
};

/// Pseudo-arclength continuation from a solution. `direction` is the sign of
/// the initial epsilon motion; the trace stops at the window boundary (the
/// final point is re-solved exactly on it), after max_steps accepted points,
/// or on step underflow (recorded as a "stall" event, never dropped).
///
/// Events: "fold" when the tangent's epsilon component flips sign;
/// "branch-point" when the Morse index changes across a fold-free segment —
/// the crossing is then bisected (raw factorization inertia, no zero band)
/// to an epsilon bracket of width <= bracket_width; "index-change" when the
/// segment contains a fold and bisection in epsilon is ill-posed.
Branch continue_branch(const Problem& prob, const SolutionPoint& start, int direction,
                       double eps_lo, double eps_hi, const StepControl& ctrl = {},
                       std::string branch_tag = "branch");

/// Predictor states u +- delta * phi for every numerical kernel direction phi
/// of the Hessian at `at` (W-normalized eigenfields with |lambda| within the
/// shared zero tolerance). Callers correct them with newton_solve at a
/// slightly perturbed epsilon. Rejects points with nullity zero.
std::vector<ScalarField> branch_switch(const Problem& prob, const SolutionPoint& at,
                                       double delta);

/// A group of solutions that are discrete translates of one profile: the
/// kernel of the Hessian at each member matches the lattice translation
/// directions, so the degeneracy is forced by the torus symmetry rather than
/// by a parameter coincidence.
struct OrbitRecord {
  int robust_index = 0;  // negative-eigenvalue count, constant across members
  int dim = 0;           // kernel dimension matched to translations
  std::vector<std::size_t> members;  // positions in the verified solution list
  bool negation_closed = false;
  double energy = 0.0;  // representative
};

struct IndexTally {
  int k = 0;
  int strict_count = 0;      // nondegenerate solutions of index k (paired)
  bool orbit_support = false;  // covered by a symmetric orbit, see notes
  bool satisfied = false;
};

struct BifurcationReport {
  std::string verdict;  // PASS | FAIL | NOT_APPLICABLE
  double epsilon = 0.0;
  int l = 0;  // Morse index of the zero solution
  double nearest_singular = -1.0;  // closest singular epsilon probed; -1 if none found
  std::vector<IndexTally> tallies;   // one per 0 <= k < l
  std::vector<OrbitRecord> orbits;
  std::vector<std::string> notes;
  std::vector<std::string> failures;  // unpaired witnesses, bound violations, gaps
  std::string to_text() const;
};

/// Checks the expected branch structure at a fixed epsilon against a computed
/// solution set: with l the index of the zero solution, every index
/// 0 <= k < l must carry at least two solutions closed under u -> -u.
///
/// Strictly nondegenerate pairs count directly. On exactly symmetric tori
/// nonconstant profiles come in translation orbits whose members carry a
/// numerically zero translation eigenvalue; such an orbit (kernel matched to
/// the lattice translation directions, negation-closed, robust index k, dim s)
/// supports every index in [k, k+s]: any symmetry-breaking perturbation
/// splits it into nondegenerate +-pairs spread over exactly those indices.
/// The report states when a tally relies on this orbit accounting.
///
/// Returns NOT_APPLICABLE when epsilon sits inside the relative band 1e-4 of
/// a singular parameter (a constant solution is then degenerate and the
/// counting hypothesis fails). Requires an odd potential and a spectrum
/// window wide enough to certify the band check.
BifurcationReport verify_bifurcation_theorem(const Problem& prob,
                                             const std::vector<SolutionPoint>& solutions,
                                             const SpectrumResult& lap_spec);

/// Laplacian spectrum wide enough for verify_bifurcation_theorem and
/// constant-solution index counts at this problem's epsilon.
SpectrumResult spectrum_for_verification(const Problem& prob);

}  // namespace acmorse
