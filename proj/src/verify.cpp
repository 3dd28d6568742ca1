#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "acmorse/solver.hpp"

namespace acmorse {

namespace {

constexpr double kPairTol = 1e-4;         // negation / distinctness matching scale
constexpr double kSingularBand = 1e-4;    // relative exclusion band around singular epsilons
constexpr double kFrameResidual = 0.05;   // kernel-to-translation subspace match threshold

// W-orthonormal lattice translation directions at u: centered shift
// differences along each axis, Gram-Schmidt reduced. Axes along which u is
// constant contribute nothing.
std::vector<Eigen::VectorXd> translation_frame(const Problem& prob, const ScalarField& u) {
  const TorusGrid& g = *prob.grid();
  const Eigen::VectorXd& w = prob.weights();
  const std::int64_t n = g.node_count();
  std::vector<Eigen::VectorXd> frame;
  for (int ax = 0; ax < g.dim(); ++ax) {
    Eigen::VectorXd t(n);
    const double inv2h = 1.0 / (2.0 * g.spacing(ax));
    for (std::int64_t i = 0; i < n; ++i)
      t[i] = (u.values[g.neighbor(i, ax, +1)] - u.values[g.neighbor(i, ax, -1)]) * inv2h;
    for (const Eigen::VectorXd& f : frame) t -= dot_w(t, f, w) * f;
    const double nn = norm_w(t, w);
    if (nn > 1e-8 * (1.0 + u.sup_norm())) frame.push_back(t / nn);
  }
  return frame;
}

struct KernelProbe {
  bool translational = false;  // every kernel direction lies in the frame
  double worst_residual = 0.0;
  int kernel_dim = 0;
};

KernelProbe probe_kernel(const Problem& prob, const SolutionPoint& pt) {
  const LinearOperator H = prob.hessian(pt.u);
  const double tol = prob.hessian_zero_tol(pt.u);
  const Eigen::Index n = H.size();
  int m = static_cast<int>(std::min<Eigen::Index>(n, pt.index + pt.nullity + 2));
  SpectrumResult spec;
  for (;;) {
    spec = eigen_solve(H, m);
    if (spec.eigenvalues[m - 1] > tol || m == n) break;
    m = static_cast<int>(std::min<Eigen::Index>(n, 2 * m));
  }

  const auto frame = translation_frame(prob, pt.u);
  const Eigen::VectorXd& w = prob.weights();
  KernelProbe out;
  out.translational = !frame.empty();
  for (int i = 0; i < m; ++i) {
    if (std::abs(spec.eigenvalues[i]) > tol) continue;
    ++out.kernel_dim;
    Eigen::VectorXd rem = spec.eigenfields[i].values;
    for (const Eigen::VectorXd& f : frame) rem -= dot_w(rem, f, w) * f;
    const double res = norm_w(rem, w);  // eigenfields are W-normalized
    out.worst_residual = std::max(out.worst_residual, res);
    if (res >= kFrameResidual) out.translational = false;
  }
  return out;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

SpectrumResult spectrum_for_verification(const Problem& prob) {
  double worst = 0.0;
  for (const PotentialZero& z : prob.potential().zeros()) worst = std::max(worst, -z.fprime);
  const double need = worst / prob.epsilon() * 1.1;
  const Eigen::Index n = prob.grid()->node_count();
  int m = static_cast<int>(std::min<Eigen::Index>(n, 8));
  for (;;) {
    SpectrumResult spec = laplacian_spectrum(prob, m);
    if (spec.eigenvalues[m - 1] > need || m == n) return spec;
    m = static_cast<int>(std::min<Eigen::Index>(n, 2 * m));
  }
}

BifurcationReport verify_bifurcation_theorem(const Problem& prob,
                                             const std::vector<SolutionPoint>& solutions,
                                             const SpectrumResult& lap_spec) {
  const Potential& p = prob.potential();
  if (!p.is_odd())
    throw std::invalid_argument(
        "verify_bifurcation_theorem: the u -> -u pairing needs an odd nonlinearity");
  const double eps = prob.epsilon();
  const Eigen::VectorXd& w = prob.weights();

  BifurcationReport rep;
  rep.epsilon = eps;

  // Certify the spectrum window is wide enough to see every Laplacian
  // eigenvalue that could place a singular parameter near this epsilon.
  double worst = 0.0;
  for (const PotentialZero& z : p.zeros()) worst = std::max(worst, -z.fprime);
  const Eigen::Index nn = prob.grid()->node_count();
  if (worst > 0.0 && lap_spec.eigenvalues.size() < nn &&
      lap_spec.eigenvalues[lap_spec.eigenvalues.size() - 1] <= worst / eps * 1.05)
    throw std::invalid_argument(
        "verify_bifurcation_theorem: spectrum window too small for the singular-band check");

  // Singular-parameter exclusion band (relative width 1e-4).
  const auto sing = singular_epsilons(lap_spec, p, eps * 0.5, eps * 2.0);
  for (const SingularEpsilon& s : sing) {
    const double d = std::abs(eps - s.epsilon);
    if (rep.nearest_singular < 0.0 || d < std::abs(eps - rep.nearest_singular))
      rep.nearest_singular = s.epsilon;
    if (d < kSingularBand * s.epsilon) {
      rep.verdict = "NOT_APPLICABLE";
      rep.notes.push_back("epsilon lies within the relative band " + fmt(kSingularBand) +
                          " of the singular parameter " + fmt(s.epsilon) +
                          " (constant solution degenerate there); the counting hypothesis fails");
      return rep;
    }
  }

  const IndexPair zero_idx = constant_index(prob, 0.0, lap_spec);
  rep.l = zero_idx.index;
  if (zero_idx.nullity > 0) {
    rep.verdict = "NOT_APPLICABLE";
    rep.notes.push_back("the zero solution is degenerate at this epsilon");
    return rep;
  }

  // Contract checks on the input set: deduplicated, valid, inside the box.
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    const SolutionPoint& s = solutions[i];
    if (!s.u.grid || !s.u.grid->same_layout(*prob.grid()))
      throw std::invalid_argument("verify_bifurcation_theorem: solution '" + s.tag +
                                  "' lives on a different grid");
    for (std::size_t j = i + 1; j < solutions.size(); ++j)
      if (norm_w(s.u.values - solutions[j].u.values, w) <= kPairTol)
        throw std::invalid_argument("verify_bifurcation_theorem: solutions '" + s.tag +
                                    "' and '" + solutions[j].tag + "' are duplicates");
    if (s.residual_norm > 1e-10)
      rep.failures.push_back("'" + s.tag + "' misses the residual tolerance (" +
                             fmt(s.residual_norm) + ")");
    if (s.u.sup_norm() > p.T0() + 1e-6)
      rep.failures.push_back("'" + s.tag + "' violates the a-priori bound: sup " +
                             fmt(s.u.sup_norm()) + " > " + fmt(p.T0()) + " + 1e-6");
  }

  // Negation pairing over the whole set.
  std::vector<bool> paired(solutions.size(), false);
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    if (solutions[i].u.sup_norm() <= 1e-8) {
      paired[i] = true;  // the zero solution is its own negative
      continue;
    }
    for (std::size_t j = 0; j < solutions.size(); ++j) {
      if (norm_w(solutions[i].u.values + solutions[j].u.values, w) <= kPairTol) {
        paired[i] = true;
        break;
      }
    }
    if (!paired[i])
      rep.failures.push_back("unpaired witness: '" + solutions[i].tag +
                             "' has no negative in the set");
  }

  // Degenerate members: decide whether the kernel is the torus translation
  // symmetry; group translational ones into orbits of one profile.
  std::vector<int> orbit_of(solutions.size(), -1);
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    const SolutionPoint& s = solutions[i];
    if (s.nullity == 0) continue;
    const KernelProbe probe = probe_kernel(prob, s);
    if (!probe.translational) {
      rep.failures.push_back("'" + s.tag + "' is degenerate (nullity " +
                             std::to_string(s.nullity) +
                             ") and its kernel does not match the translation directions "
                             "(worst subspace residual " +
                             fmt(probe.worst_residual) + ")");
      continue;
    }
    // Orbit key: robust index, kernel dimension, energy level. Members of
    // one translation orbit agree in all three to machine precision, while
    // the sup norm drifts at the grid scale along the flat valley.
    bool placed = false;
    for (OrbitRecord& orb : rep.orbits) {
      if (orb.robust_index == s.index && orb.dim == s.nullity &&
          std::abs(orb.energy - s.energy) <= 1e-6 * (1.0 + std::abs(orb.energy))) {
        orb.members.push_back(i);
        placed = true;
        break;
      }
    }
    if (!placed) {
      OrbitRecord orb;
      orb.robust_index = s.index;
      orb.dim = s.nullity;
      orb.energy = s.energy;
      orb.members.push_back(i);
      rep.orbits.push_back(std::move(orb));
    }
  }
  for (OrbitRecord& orb : rep.orbits) {
    orb.negation_closed = true;
    for (std::size_t i : orb.members) {
      bool hit = false;
      for (std::size_t j : orb.members)
        if (norm_w(solutions[i].u.values + solutions[j].u.values, w) <= kPairTol) {
          hit = true;
          break;
        }
      if (!hit) orb.negation_closed = false;
    }
  }

  // Tallies per index 0 <= k < l.
  bool used_orbits = false;
  for (int k = 0; k < rep.l; ++k) {
    IndexTally tally;
    tally.k = k;
    for (std::size_t i = 0; i < solutions.size(); ++i)
      if (solutions[i].nullity == 0 && solutions[i].index == k && paired[i]) ++tally.strict_count;
    for (const OrbitRecord& orb : rep.orbits)
      if (orb.negation_closed && orb.members.size() >= 2 && orb.robust_index <= k &&
          k <= orb.robust_index + orb.dim)
        tally.orbit_support = true;
    tally.satisfied = tally.strict_count >= 2 || tally.orbit_support;
    if (tally.satisfied && tally.strict_count < 2) used_orbits = true;
    if (!tally.satisfied)
      rep.failures.push_back("index " + std::to_string(k) +
                             " is not supported by two paired solutions");
    rep.tallies.push_back(tally);
  }

  if (used_orbits)
    rep.notes.push_back(
        "some indices are supported by symmetric translation orbits: on the exactly "
        "symmetric torus a nonconstant profile is degenerate along the lattice "
        "translations, and a negation-closed orbit of robust index k and kernel "
        "dimension s splits under any symmetry-breaking perturbation into "
        "nondegenerate +-pairs covering every index in [k, k+s]");
  if (prob.grid()->dim() < 3)
    rep.notes.push_back(
        "dimension " + std::to_string(prob.grid()->dim()) +
        " run: the nondegenerate-count refinement of the underlying genericity theory "
        "needs dimension >= 3, so below that this verdict validates the computed branch "
        "structure rather than the full strength of the statement");
  if (rep.nearest_singular >= 0.0)
    rep.notes.push_back("nearest singular parameter probed: " + fmt(rep.nearest_singular) +
                        " (distance " + fmt(std::abs(eps - rep.nearest_singular)) + ")");

  rep.verdict = rep.failures.empty() ? "PASS" : "FAIL";
  return rep;
}

std::string BifurcationReport::to_text() const {
  std::ostringstream os;
  os << "bifurcation structure check at epsilon = " << fmt(epsilon) << "\n";
  os << "verdict: " << verdict << "\n";
  os << "index of the zero solution: l = " << l << "\n";
  for (const IndexTally& t : tallies) {
    os << "  index " << t.k << ": " << t.strict_count << " paired nondegenerate solution(s)";
    if (t.orbit_support) os << ", orbit-supported";
    os << (t.satisfied ? "  [ok]" : "  [NOT SATISFIED]") << "\n";
  }
  for (const OrbitRecord& o : orbits)
    os << "  orbit: robust index " << o.robust_index << ", kernel dim " << o.dim << ", "
       << o.members.size() << " member(s), "
       << (o.negation_closed ? "negation closed" : "NOT negation closed")
       << ", energy " << fmt(o.energy) << "\n";
  for (const std::string& n : notes) os << "note: " << n << "\n";
  for (const std::string& f : failures) os << "failure: " << f << "\n";
  return os.str();
}

}  // namespace acmorse
