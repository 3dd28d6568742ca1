#include <cmath>
#include <cstdio>
#include <limits>

#include "acmorse/solver.hpp"
#include "solver_internal.hpp"

namespace acmorse {

std::pair<std::size_t, double> nearest_solution(const std::vector<SolutionPoint>& set,
                                                const ScalarField& u, const Eigen::VectorXd& w) {
  std::size_t best = set.size();
  double dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double d = norm_w(u.values - set[i].u.values, w);
    if (d < dist) {
      dist = d;
      best = i;
    }
  }
  return {best, dist};
}

namespace {

// Deflation factor m(u) = prod_a (1/|u - u_a|_W^2 + 1) over anchor states,
// tracked through its logarithm; grad_over_m returns (grad m)/m, the only
// combination the Sherman-Morrison step needs.
struct Deflator {
  std::vector<const Eigen::VectorXd*> anchors;
  const Eigen::VectorXd* w = nullptr;

  double log_value(const Eigen::VectorXd& u) const {
    double lv = 0.0;
    for (const auto* a : anchors) {
      const Eigen::VectorXd d = u - *a;
      const double rho = d.dot(w->cwiseProduct(d));
      lv += std::log1p(1.0 / rho);  // rho = 0 only exactly on an anchor
    }
    return lv;
  }

  Eigen::VectorXd grad_over_m(const Eigen::VectorXd& u) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(u.size());
    for (const auto* a : anchors) {
      const Eigen::VectorXd d = u - *a;
      const double rho = d.dot(w->cwiseProduct(d));
      g += (-2.0 / (rho * (1.0 + rho))) * w->cwiseProduct(d);
    }
    return g;
  }
};

// Newton on the deflated residual m(u) R(u). The step for the rank-one
// modified Jacobian m (J + R d^T), d = grad m / m, reduces by
// Sherman-Morrison to s = -y / (1 + d^T y) with J y = R.
bool deflated_newton(const Problem& prob, const Deflator& defl, ScalarField& u,
                     const DeflationOptions& opt) {
  const double escape = 10.0 * prob.potential().T0();
  const Eigen::VectorXd& w = prob.weights();
  double rn = prob.residual_norm(u);
  double merit = defl.log_value(u.values) + std::log(std::max(rn, 1e-300));

  for (int iter = 0; iter < opt.max_iter; ++iter) {
    if (rn <= opt.newton.tol) return true;  // undeflated convergence
    if (u.sup_norm() > escape || !u.values.allFinite()) return false;

    const LinearOperator H = prob.hessian(u);
    const Eigen::VectorXd r = prob.residual(u).values;
    Eigen::VectorXd y;
    bool regularized = false;
    if (!detail::solve_possibly_regularized(H.form(), w, r.cwiseProduct(w), y, regularized))
      return false;
    const double denom = 1.0 + defl.grad_over_m(u.values).dot(y);
    // A vanishing denominator means the deflated Jacobian is singular along
    // this step; fall back to the undeflated direction.
    const Eigen::VectorXd s = (std::abs(denom) > 1e-12) ? (-y / denom).eval() : (-y).eval();

    bool accepted = false;
    for (double alpha = 1.0; alpha >= opt.newton.min_step; alpha *= opt.newton.backtrack) {
      ScalarField trial(u.grid, u.values + alpha * s);
      if (!trial.values.allFinite()) continue;
      const double tn = prob.residual_norm(trial);
      if (tn <= 0.0) {
        u = std::move(trial);
        rn = 0.0;
        accepted = true;
        break;
      }
      const double tmerit = defl.log_value(trial.values) + std::log(tn);
      if (tmerit <= merit + std::log1p(-opt.newton.armijo_c * alpha)) {
        u = std::move(trial);
        rn = tn;
        merit = tmerit;
        accepted = true;
        break;
      }
    }
    if (!accepted) return false;
  }
  return rn <= opt.newton.tol;
}

}  // namespace

std::vector<SolutionPoint> deflated_search(const Problem& prob,
                                           const std::vector<SolutionPoint>& known, int seeds,
                                           std::uint64_t rng_seed, const DeflationOptions& opt) {
  if (seeds < 0) throw std::invalid_argument("deflated_search: negative seed count");
  for (const SolutionPoint& k : known) {
    if (k.residual_norm > 1e-8)
      throw std::invalid_argument("deflated_search: known point '" + k.tag +
                                  "' is not a solution at this epsilon");
    if (!k.u.grid || !k.u.grid->same_layout(*prob.grid()))
      throw std::invalid_argument("deflated_search: known point grid mismatch");
  }

  const Eigen::VectorXd& w = prob.weights();
  const double T0 = prob.potential().T0();
  std::vector<SolutionPoint> found;
  Rng rng(rng_seed);

  for (int sd = 0; sd < seeds; ++sd) {
    // Fixed draw order keeps the sequence independent of convergence history.
    const double amp = rng.uniform(opt.amplitude_lo, opt.amplitude_hi) * T0;
    ScalarField u = random_band_limited_field(prob.grid(), rng, amp, opt.max_mode);

    Deflator defl;
    defl.w = &w;
    defl.anchors.reserve(known.size() + found.size());
    for (const auto& k : known) defl.anchors.push_back(&k.u.values);
    for (const auto& f : found) defl.anchors.push_back(&f.u.values);

    if (!deflated_newton(prob, defl, u, opt)) continue;

    bool distinct = true;
    for (const auto* a : defl.anchors)
      if (norm_w(u.values - *a, w) <= opt.distinct_tol) {
        distinct = false;
        break;
      }
    if (!distinct) continue;
    found.push_back(classify_solution(prob, u, "seed " + std::to_string(sd)));
  }
  return found;
}

std::vector<SolutionPoint> solution_sweep(const Problem& prob, int seeds, std::uint64_t rng_seed,
                                          const DeflationOptions& opt) {
  const Potential& p = prob.potential();
  std::vector<SolutionPoint> all;
  for (const PotentialZero& z : p.zeros()) {
    const ScalarField c = ScalarField::constant(prob.grid(), z.location);
    char tag[64];
    std::snprintf(tag, sizeof tag, "constant %.6g", z.location);
    all.push_back(classify_solution(prob, c, tag));
  }

  std::vector<SolutionPoint> extra = deflated_search(prob, all, seeds, rng_seed, opt);
  for (auto& e : extra) all.push_back(std::move(e));

  if (p.is_odd()) {
    const Eigen::VectorXd& w = prob.weights();
    const std::size_t base = all.size();
    for (std::size_t i = 0; i < base; ++i) {
      const ScalarField neg(prob.grid(), (-all[i].u.values).eval());
      if (nearest_solution(all, neg, w).second > opt.distinct_tol)
        all.push_back(classify_solution(prob, neg, all[i].tag + " negated"));
    }
  }
  return all;
}

}  // namespace acmorse
