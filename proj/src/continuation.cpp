#include <algorithm>
#include <cmath>

#include <Eigen/SparseLU>

#include "acmorse/solver.hpp"
#include "solver_internal.hpp"

namespace acmorse {

namespace {

// Tangent (du, de) normalized in |du|_W^2 + de^2 = 1.
struct Tangent {
  Eigen::VectorXd du;
  double de = 0.0;
};

double tangent_norm(const Eigen::VectorXd& du, double de, const Eigen::VectorXd& w) {
  return std::sqrt(du.dot(w.cwiseProduct(du)) + de * de);
}

// One corrector solve: Newton on the extended system
//   [ W R(u, eps) = eps K u + W f(u) ]   (n rows)
//   [ <du_hat, u - u_p>_W + de_hat (eps - eps_p) ]  (1 row)
// with Jacobian [ M_H  K u ; (W du_hat)^T  de_hat ]. The constraint row is
// linear, so it is satisfied exactly after the first iteration.
bool correct(const Problem& prob0, const Tangent& tan, const Eigen::VectorXd& up, double ep,
             int max_iter, double tol, ScalarField& u_out, double& eps_out) {
  const GridPtr& grid = prob0.grid();
  const Eigen::VectorXd& w = prob0.weights();
  const Eigen::Index n = w.size();
  const Eigen::SparseMatrix<double>& lap_form = prob0.laplacian().form();  // -K

  Eigen::VectorXd u = up;
  double eps = ep;
  const double escape = 10.0 * prob0.potential().T0();

  for (int it = 0; it < max_iter; ++it) {
    if (!u.allFinite() || !(eps > 0.0)) return false;
    const Problem prob = prob0.with_epsilon(eps);
    const ScalarField uf(grid, u);
    if (uf.sup_norm() > escape) return false;

    const Eigen::VectorXd r = prob.residual(uf).values;
    const double rn = norm_w(r, w);
    if (rn <= tol) {
      u_out = uf;
      eps_out = eps;
      return true;
    }

    const LinearOperator H = prob.hessian(uf);
    const Eigen::VectorXd Ku = -(lap_form * u);  // K u, the epsilon-derivative of W R
    const double cons = tan.du.dot(w.cwiseProduct(u - up)) + tan.de * (eps - ep);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(H.form().nonZeros() + 2 * n + 1);
    for (int k = 0; k < H.form().outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator itm(H.form(), k); itm; ++itm)
        trip.emplace_back(static_cast<int>(itm.row()), static_cast<int>(itm.col()), itm.value());
    for (Eigen::Index i = 0; i < n; ++i) {
      if (Ku[i] != 0.0) trip.emplace_back(static_cast<int>(i), static_cast<int>(n), Ku[i]);
      const double bi = w[i] * tan.du[i];
      if (bi != 0.0) trip.emplace_back(static_cast<int>(n), static_cast<int>(i), bi);
    }
    trip.emplace_back(static_cast<int>(n), static_cast<int>(n), tan.de);

    Eigen::SparseMatrix<double> J(n + 1, n + 1);
    J.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(J);
    if (lu.info() != Eigen::Success) return false;

    Eigen::VectorXd rhs(n + 1);
    rhs.head(n) = -r.cwiseProduct(w);
    rhs[n] = -cons;
    const Eigen::VectorXd step = lu.solve(rhs);
    if (!step.allFinite()) return false;
    u += step.head(n);
    eps += step[n];
  }
  return false;
}

int raw_index_at(const Problem& prob, const ScalarField& u) {
  return morse_index(prob.hessian(u), 0.0).index;
}

}  // namespace

Branch continue_branch(const Problem& prob, const SolutionPoint& start, int direction,
                       double eps_lo, double eps_hi, const StepControl& ctrl,
                       std::string branch_tag) {
  if (direction != 1 && direction != -1)
    throw std::invalid_argument("continue_branch: direction must be +1 or -1");
  if (!(eps_lo > 0.0) || !(eps_hi > eps_lo))
    throw std::invalid_argument("continue_branch: window must satisfy 0 < lo < hi");
  if (start.epsilon < eps_lo - 1e-12 || start.epsilon > eps_hi + 1e-12)
    throw std::invalid_argument("continue_branch: start epsilon outside the window");

  const Eigen::VectorXd& w = prob.weights();
  Branch br;
  br.tag = branch_tag;

  // Re-polish the start at its own epsilon so the branch begins on a point
  // that satisfies the solver tolerance regardless of how it was produced.
  const Problem prob_start = prob.with_epsilon(start.epsilon);
  NewtonResult pol = newton_solve(prob_start, start.u, branch_tag, ctrl.newton);
  if (!pol.converged)
    throw std::invalid_argument("continue_branch: start does not correct to a solution (" +
                                pol.failure + ")");
  br.points.push_back(std::move(pol.point));
  br.arclengths.push_back(0.0);

  Tangent tan;
  tan.du = Eigen::VectorXd::Zero(w.size());
  tan.de = static_cast<double>(direction);

  double ds = ctrl.ds0;
  double s_arc = 0.0;
  bool boundary_hit = false;

  for (int step = 0; step < ctrl.max_steps && !boundary_hit; ++step) {
    const SolutionPoint& cur = br.points.back();

    ScalarField u_new;
    double eps_new = 0.0;
    bool ok = false;
    for (; ds >= ctrl.ds_min; ds *= 0.5) {
      Eigen::VectorXd up = cur.u.values + ds * tan.du;
      double ep = cur.epsilon + ds * tan.de;
      // A predictor beyond the window is landed exactly on the boundary by a
      // natural-parameter solve (frozen epsilon).
      bool clamped = false;
      if (ep <= eps_lo || ep >= eps_hi) {
        ep = std::clamp(ep, eps_lo, eps_hi);
        clamped = true;
      }
      Tangent ct = tan;
      if (clamped) {
        ct.du.setZero();
        ct.de = 1.0;  // constraint row pins epsilon to the boundary value
        up = cur.u.values;
      }
      if (correct(prob, ct, up, ep, ctrl.max_corrector, ctrl.newton.tol, u_new, eps_new)) {
        ok = true;
        boundary_hit = clamped;
        break;
      }
    }
    if (!ok) {
      BranchEvent ev;
      ev.arclength = s_arc;
      ev.kind = "stall";
      ev.eps_lo = ev.eps_hi = cur.epsilon;
      ev.index_before = ev.index_after = cur.index;
      ev.note = "arclength step underflowed below its floor";
      br.events.push_back(ev);
      break;
    }

    const Eigen::VectorXd delta_u = u_new.values - cur.u.values;
    const double delta_e = eps_new - cur.epsilon;
    const double dist = tangent_norm(delta_u, delta_e, w);
    if (dist <= 1e-14) {
      // Corrector returned the same point (window boundary from the inside).
      break;
    }

    SolutionPoint next = classify_solution(prob.with_epsilon(eps_new), u_new, branch_tag);
    s_arc += dist;

    // Fold: the secant's epsilon component flips sign.
    const bool fold_here = (tan.de != 0.0) && (delta_e * tan.de < 0.0) && br.points.size() > 1;
    if (fold_here) {
      BranchEvent ev;
      ev.arclength = s_arc;
      ev.kind = "fold";
      ev.eps_lo = std::min(cur.epsilon, eps_new);
      ev.eps_hi = std::max(cur.epsilon, eps_new);
      ev.index_before = cur.index;
      ev.index_after = next.index;
      ev.note = "tangent epsilon component changed sign";
      br.events.push_back(ev);
    }

    if (next.index != cur.index) {
      BranchEvent ev;
      ev.arclength = s_arc;
      ev.index_before = cur.index;
      ev.index_after = next.index;
      if (!fold_here && std::abs(delta_e) > 0.0) {
        // Transversal crossing: bisect on raw factorization inertia. The zero
        // band is deliberately off here; a banded count would bias the
        // bracket sideways by the band width.
        double a = cur.epsilon, b = eps_new;
        Eigen::VectorXd ua = cur.u.values, ub = u_new.values;
        const int ia0 = raw_index_at(prob.with_epsilon(a), ScalarField(prob.grid(), ua));
        const int ib0 = raw_index_at(prob.with_epsilon(b), ScalarField(prob.grid(), ub));
        if (ia0 != ib0) {
          while (std::abs(b - a) > ctrl.bracket_width) {
            const double mid = 0.5 * (a + b);
            const ScalarField guess(prob.grid(), (0.5 * (ua + ub)).eval());
            NewtonResult nm = newton_solve(prob.with_epsilon(mid), guess, branch_tag, ctrl.newton);
            if (!nm.converged) break;
            const int im = raw_index_at(prob.with_epsilon(mid), nm.point.u);
            if (im == ia0) {
              a = mid;
              ua = nm.point.u.values;
            } else {
              b = mid;
              ub = nm.point.u.values;
            }
          }
          ev.kind = "branch-point";
          ev.eps_lo = std::min(a, b);
          ev.eps_hi = std::max(a, b);
          ev.note = "index change localized by raw-inertia bisection";
        } else {
          ev.kind = "index-change";
          ev.eps_lo = std::min(a, b);
          ev.eps_hi = std::max(a, b);
          ev.note = "banded index moved without a raw inertia change across the segment";
        }
      } else {
        ev.kind = "index-change";
        ev.eps_lo = std::min(cur.epsilon, eps_new);
        ev.eps_hi = std::max(cur.epsilon, eps_new);
        ev.note = "epsilon not monotone across the segment; bracket is the whole segment";
      }
      br.events.push_back(ev);
    }

    tan.du = delta_u / dist;
    tan.de = delta_e / dist;
    br.points.push_back(std::move(next));
    br.arclengths.push_back(s_arc);

    ds = std::min(ds * ctrl.grow, ctrl.ds_max);
  }
  return br;
}

std::vector<ScalarField> branch_switch(const Problem& prob, const SolutionPoint& at,
                                       double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("branch_switch: delta must be positive");
  const LinearOperator H = prob.hessian(at.u);
  const double tol = prob.hessian_zero_tol(at.u);

  const Eigen::Index n = H.size();
  int m = static_cast<int>(std::min<Eigen::Index>(n, at.index + std::max(at.nullity, 1) + 2));
  SpectrumResult spec;
  for (;;) {
    spec = eigen_solve(H, m);
    if (spec.eigenvalues[m - 1] > tol || m == n) break;
    m = static_cast<int>(std::min<Eigen::Index>(n, 2 * m));
  }

  std::vector<ScalarField> seeds;
  for (int i = 0; i < m; ++i) {
    if (std::abs(spec.eigenvalues[i]) > tol) continue;
    seeds.emplace_back(prob.grid(), (at.u.values + delta * spec.eigenfields[i].values).eval());
    seeds.emplace_back(prob.grid(), (at.u.values - delta * spec.eigenfields[i].values).eval());
  }
  if (seeds.empty())
    throw std::invalid_argument("branch_switch: the Hessian has no kernel directions here");
  return seeds;
}

}  // namespace acmorse
