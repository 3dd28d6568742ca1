/// @file flow.hpp
/// The parabolic gradient flow u_t = eps Delta_g u - f(u): IMEX time
/// stepping with energy-decrease monitoring, space-constant scalar
/// trajectories between adjacent potential zeros, linearized mode-decay
/// certification along them, and mod-2 connection counting between
/// stationary solutions by unstable-manifold sampling.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "acmorse/solver.hpp"

namespace acmorse {

/// A sampled descent trajectory. times/states/energies are aligned triples;
/// energies are nonincreasing within 1e-9 * (1 + |E|) per accepted step by
/// construction (steps violating that are rejected and retried smaller).
struct Trajectory {
  std::vector<double> times;
  std::vector<ScalarField> states;
  std::vector<double> energies;
  std::optional<SolutionPoint> limit_start;  // nearest known solution to states.front()
  std::optional<SolutionPoint> limit_end;    // set only when equilibrated within 1e-3 of it
  double max_energy_uptick = 0.0;  // largest accepted E increase (bounded by the tolerance)
  std::int64_t steps_taken = 0;    // accepted steps, sampled or not
  bool equilibrated = false;       // weighted residual norm reached the tolerance
  std::string note;                // set when the run stopped for a non-equilibrium reason
};

/// One IMEX step: (W + dt eps K) u+ = W (u - dt f(u)), implicit in the
/// stiff linear part, explicit in the nonlinearity. Fixed points are exactly
/// the zeros of the stationary residual. A factorization failure retries as
/// two half steps once, then throws std::runtime_error.
ScalarField flow_step(const Problem& prob, const ScalarField& u, double dt);

struct FlowOptions {
  double dt0 = 1e-2;
  /// Step-size ceiling. 0 selects 1 / (2 max|f'| on [-T0, T0]), which keeps
  /// the explicit map monotone on the a-priori box so the box is preserved.
  double dt_max = 0.0;
  std::int64_t max_steps = 100000;
  double equil_tol = 1e-8;         // weighted residual norm at equilibration
  std::int64_t sample_stride = 1;  // keep every k-th accepted state
  double uptick_tol = 1e-9;        // relative energy-increase rejection threshold
};

/// Runs the IMEX flow from u0 until equilibration or the step budget.
/// Steps whose energy rises beyond uptick_tol * (1 + |E|) are rejected and
/// dt halves; 20 consecutive accepts grow dt by 1.5 up to the ceiling.
/// When `known` is nonempty the endpoints are classified against it:
/// limit_end requires equilibration and weighted distance <= 1e-3,
/// limit_start uses the looser 1e-2 (starts are typically small
/// perturbations of a known state).
Trajectory run_flow(const Problem& prob, const ScalarField& u0, const FlowOptions& opt = {},
                    const std::vector<SolutionPoint>& known = {});

/// The space-constant flow w' = -f(w), a scalar trajectory in time.
struct ScalarTrajectory {
  std::vector<double> times;
  std::vector<double> values;
  double c_minus = 0.0;  // limit as t -> -infinity
  double c_plus = 0.0;   // limit as t -> +infinity
};

/// Integrates w' = -f(w) from just off c_minus until |w - c_plus| < 1e-10,
/// with an embedded adaptive Runge-Kutta pair at per-step tolerance 1e-12.
/// Requires adjacent zeros with f'(c_minus) < 0 < f'(c_plus) (descent from a
/// local maximum of F to the neighboring minimum); throws
/// std::invalid_argument otherwise, including when an intermediate zero
/// blocks the flow.
ScalarTrajectory space_constant_trajectory(const Potential& p, double c_minus, double c_plus);

/// Certificate that nonconstant spatial modes decay backward in time along a
/// space-constant trajectory, so only the zero mode supports bounded
/// linearized solutions.
struct ModeDecayReport {
  bool applicable = false;  // epsilon exceeds the bound below
  double bound = 0.0;       // max|f'| on [-T0, T0] divided by the first nonzero eigenvalue
  std::vector<double> margins;  // per mode k >= 1: min over t of eps lambda_k + f'(w(t))
  std::vector<bool> monotone;   // per mode: linearized amplitude grows on every sample interval
  bool all_positive = false;
  std::string note;
};

/// Checks eps lambda_k + f'(w(t)) > 0 along the whole trajectory (endpoints
/// included through f'(c_+-)) for modes k = 1..modes, and that the
/// linearized mode amplitude integral grows on every sampled interval.
/// When epsilon <= bound the report is returned not applicable, without a
/// verdict. modes = 0 yields an empty applicable report.
ModeDecayReport mode_decay_check(const Problem& prob, const ScalarTrajectory& w, int modes);

/// One unstable-manifold launch and where it went.
struct LaunchRecord {
  int direction = 0;        // ordinal into the launch list (axis pairs first)
  double delta = 0.0;       // perturbation amplitude actually used
  bool resolved = false;    // equilibrated onto a known solution
  bool delta_stable = false;  // the half-amplitude relaunch reached the same limit
  std::size_t limit = 0;    // index into the solution list when resolved
  double distance = 0.0;    // final weighted distance to the nearest solution
  double time = 0.0;        // flow time elapsed
};

struct ConnectionCount {
  int parity = 0;        // mod-2 count of axis launches reaching `to`
  bool exact = false;    // index-1 source, every counted launch resolved and stable
  bool reliable = false; // every counted launch resolved and stable
  std::vector<LaunchRecord> launches;
  std::string note;
};

/// Counts flow trajectories from solution `from` (index k >= 1) to solution
/// `to` (index k-1) mod 2, by launching the flow from from.u +- delta phi
/// for each unstable eigenfield phi, delta = 1e-3 T0, and classifying limits
/// by nearest solution in `all`. Each launch is cross-checked at delta/2 and
/// delta halves up to three times if the limit is delta-sensitive. For an
/// index-1 source the two launches exhaust the unstable directions and the
/// parity is exact when both resolve stably. For k >= 2 the parity over axis
/// launches is a heuristic; `samples` extra random unstable-subspace
/// launches are recorded in the table as exploration but never counted.
/// Throws std::invalid_argument on a degenerate or index-0 source, a
/// degenerate target, or an index mismatch.
ConnectionCount connection_count_mod2(const Problem& prob, const std::vector<SolutionPoint>& all,
                                      std::size_t from, std::size_t to, int samples,
                                      std::uint64_t rng_seed, const FlowOptions& opt = {});

}  // namespace acmorse
