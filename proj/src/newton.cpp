#include <Eigen/SparseCholesky>

#include "acmorse/solver.hpp"
#include "solver_internal.hpp"

namespace acmorse {

SolutionPoint classify_solution(const Problem& prob, const ScalarField& u, std::string tag) {
  SolutionPoint pt;
  pt.epsilon = prob.epsilon();
  pt.u = u;
  pt.residual_norm = prob.residual_norm(u);
  const InertiaResult in = morse_index(prob.hessian(u), prob.hessian_zero_tol(u));
  pt.index = in.index;
  pt.nullity = in.nullity;
  pt.energy = prob.energy(u);
  pt.tag = std::move(tag);
  return pt;
}

namespace detail {

bool ldlt_healthy(const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>& f) {
  if (f.info() != Eigen::Success) return false;
  const Eigen::VectorXd D = f.vectorD();
  if (!D.allFinite()) return false;
  const double dmax = D.cwiseAbs().maxCoeff();
  return dmax > 0.0 && D.cwiseAbs().minCoeff() > 1e-14 * dmax;
}

// Solve M s = rhs; on a near-singular factorization retry with M + mu W for
// growing mu so the step stays well-defined at degenerate iterates.
bool solve_possibly_regularized(const Eigen::SparseMatrix<double>& M, const Eigen::VectorXd& w,
                                const Eigen::VectorXd& rhs, Eigen::VectorXd& s,
                                bool& regularized) {
  {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(M);
    if (ldlt_healthy(ldlt)) {
      s = ldlt.solve(rhs);
      if (s.allFinite()) return true;
    }
  }
  double mu = 1e-10;
  for (int k = 0; k < 8; ++k, mu *= 100.0) {
    Eigen::SparseMatrix<double> reg = M;
    const Eigen::SparseMatrix<double> diag((mu * w).asDiagonal());
    reg += diag;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(reg);
    if (!ldlt_healthy(ldlt)) continue;
    s = ldlt.solve(rhs);
    if (s.allFinite()) {
      regularized = true;
      return true;
    }
  }
  return false;
}

}  // namespace detail

NewtonResult newton_solve(const Problem& prob, const ScalarField& u0, std::string tag,
                          const NewtonOptions& opt) {
  if (!u0.grid || !u0.grid->same_layout(*prob.grid()))
    throw std::invalid_argument("newton_solve: state grid does not match the problem grid");
  u0.check_finite("newton_solve initial state");

  NewtonResult out;
  ScalarField u = u0;
  const double escape = 10.0 * prob.potential().T0();
  double rn = prob.residual_norm(u);

  for (int iter = 0; iter <= opt.max_iter; ++iter) {
    if (rn <= opt.tol) {
      out.converged = true;
      out.iterations = iter;
      out.point = classify_solution(prob, u, std::move(tag));
      return out;
    }
    if (u.sup_norm() > escape) {
      out.failure = "diverged: state left the a-priori box";
      out.iterations = iter;
      return out;
    }
    if (iter == opt.max_iter) break;

    const LinearOperator H = prob.hessian(u);
    const Eigen::VectorXd rhs = -prob.residual(u).values.cwiseProduct(H.weights());
    Eigen::VectorXd s;
    if (!detail::solve_possibly_regularized(H.form(), H.weights(), rhs, s, out.regularized)) {
      out.failure = "linear solve failed";
      out.iterations = iter;
      return out;
    }

    bool accepted = false;
    for (double alpha = 1.0; alpha >= opt.min_step; alpha *= opt.backtrack) {
      ScalarField trial(u.grid, u.values + alpha * s);
      if (!trial.values.allFinite()) continue;
      const double tn = prob.residual_norm(trial);
      if (tn <= (1.0 - opt.armijo_c * alpha) * rn) {
        u = std::move(trial);
        rn = tn;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.failure = "line search stalled";
      out.iterations = iter;
      return out;
    }
  }
  out.failure = "iteration budget exhausted";
  out.iterations = opt.max_iter;
  return out;
}

}  // namespace acmorse
