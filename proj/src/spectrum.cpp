#include "acmorse/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/SparseCholesky>

#include "lanczos.hpp"

namespace acmorse {

namespace {

constexpr int kDenseThreshold = 2000;
constexpr double kDefaultClusterTol = 1e-6;

// Symmetrized pencil S = W^{-1/2} M W^{-1/2}; eigenvectors map back through
// phi = W^{-1/2} psi, which restores W-orthonormality exactly.
Eigen::SparseMatrix<double> symmetrize(const LinearOperator& op) {
  const Eigen::VectorXd scale = op.weights().cwiseSqrt().cwiseInverse();
  Eigen::SparseMatrix<double> S = op.form();
  for (int k = 0; k < S.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(S, k); it; ++it)
      it.valueRef() *= scale[it.row()] * scale[it.col()];
  return S;
}

void verify_spectrum(const LinearOperator& op, const SpectrumResult& res) {
  const Eigen::VectorXd& w = op.weights();
  const int m = static_cast<int>(res.eigenvalues.size());
  for (int i = 0; i < m; ++i) {
    const Eigen::VectorXd& phi = res.eigenfields[i].values;
    const Eigen::VectorXd r = op.apply(phi) - res.eigenvalues[i] * phi;
    if (norm_w(r, w) > 1e-8 * std::max(1.0, std::abs(res.eigenvalues[i])))
      throw std::runtime_error("eigensolve residual exceeds tolerance");
    for (int j = 0; j <= i; ++j) {
      const double g = dot_w(phi, res.eigenfields[j].values, w);
      if (std::abs(g - (i == j ? 1.0 : 0.0)) > 1e-8)
        throw std::runtime_error("eigenfields are not orthonormal");
    }
  }
}

}  // namespace

std::vector<int> SpectrumResult::cluster_ids() const {
  std::vector<int> ids(eigenvalues.size());
  int id = 0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    if (i > 0 &&
        eigenvalues[i] - eigenvalues[i - 1] > cluster_tol * std::max(1.0, std::abs(eigenvalues[i])))
      ++id;
    ids[i] = id;
  }
  return ids;
}

int SpectrumResult::multiplicity(int i) const {
  const auto ids = cluster_ids();
  return static_cast<int>(std::count(ids.begin(), ids.end(), ids[i]));
}

SpectrumResult eigen_solve(const LinearOperator& op, int m, EigenMethod method) {
  const Eigen::Index n = op.size();
  if (m < 1 || m > n) throw std::invalid_argument("requested eigenpair count out of range");
  if (method == EigenMethod::Auto)
    method = (n <= kDenseThreshold || m >= n - 2) ? EigenMethod::Dense : EigenMethod::Iterative;

  const Eigen::SparseMatrix<double> S = symmetrize(op);
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  if (method == EigenMethod::Dense) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((Eigen::MatrixXd(S)));
    if (es.info() != Eigen::Success) throw std::runtime_error("dense eigensolve failed");
    values = es.eigenvalues().head(m);
    vectors = es.eigenvectors().leftCols(m);
  } else {
    detail::smallest_eigenpairs(S, m, values, vectors);
  }

  SpectrumResult res;
  res.eigenvalues = values;
  res.cluster_tol = kDefaultClusterTol;
  const Eigen::VectorXd unscale = op.weights().cwiseSqrt().cwiseInverse();
  res.eigenfields.reserve(m);
  for (int i = 0; i < m; ++i)
    res.eigenfields.emplace_back(op.grid(), (vectors.col(i).cwiseProduct(unscale)).eval());
  verify_spectrum(op, res);
  return res;
}

SpectrumResult laplacian_spectrum(const Problem& prob, int m, EigenMethod method) {
  return eigen_solve(prob.laplacian().scaled(-1.0), m, method);
}

namespace {

// Count of pencil eigenvalues strictly below `shift` by LDLT inertia of
// M - shift W. ok=false flags breakdown (failed or untrustworthy pivots).
int eigenvalues_below(const LinearOperator& H, double shift, bool& ok) {
  Eigen::SparseMatrix<double> A = H.form();
  const Eigen::SparseMatrix<double> diag((-shift * H.weights()).asDiagonal());
  A += diag;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  if (ldlt.info() != Eigen::Success) {
    ok = false;
    return 0;
  }
  const Eigen::VectorXd D = ldlt.vectorD();
  if (!D.allFinite()) {
    ok = false;
    return 0;
  }
  const double dmax = D.cwiseAbs().maxCoeff();
  if (dmax == 0.0 || D.cwiseAbs().minCoeff() <= 1e-13 * dmax) {
    ok = false;  // pivot at the noise floor: inertia not trustworthy
    return 0;
  }
  ok = true;
  return static_cast<int>((D.array() < 0.0).count());
}

}  // namespace

InertiaResult morse_index(const LinearOperator& H, double zero_tol) {
  if (zero_tol < 0.0) throw std::invalid_argument("zero_tol must be nonnegative");
  bool ok_minus = true, ok_plus = true;
  const int below_minus = eigenvalues_below(H, -zero_tol, ok_minus);
  const int below_plus =
      zero_tol == 0.0 ? below_minus : eigenvalues_below(H, zero_tol, ok_plus);
  if (ok_minus && ok_plus && below_plus >= below_minus)
    return {below_minus, below_plus - below_minus, false, ""};

  // Factorization breakdown: count from the bottom of the spectrum instead.
  InertiaResult r;
  r.used_fallback = true;
  r.note = "inertia factorization broke down; counted via eigensolve";
  const Eigen::Index n = H.size();
  int m = static_cast<int>(std::min<Eigen::Index>(n, 32));
  for (;;) {
    SpectrumResult s = eigen_solve(H, m);
    if (s.eigenvalues[m - 1] > zero_tol || m == n) {
      r.index = static_cast<int>((s.eigenvalues.array() < -zero_tol).count());
      r.nullity = static_cast<int>((s.eigenvalues.array().abs() <= zero_tol).count());
      return r;
    }
    m = static_cast<int>(std::min<Eigen::Index>(n, 2 * m));
  }
}

IndexPair constant_index(const Problem& prob, double c, const SpectrumResult& lap_spec) {
  const Potential& p = prob.potential();
  if (std::abs(p.f(c)) > 1e-10 * (1.0 + std::abs(c)))
    throw std::invalid_argument("constant is not a zero of the nonlinearity");
  const double fp = p.fprime(c);
  const double tol = prob.hessian_zero_tol_constant(c);
  const Eigen::VectorXd& lam = lap_spec.eigenvalues;
  if (lam.size() == 0) throw std::invalid_argument("empty spectrum");
  if (prob.epsilon() * lam[lam.size() - 1] + fp <= tol &&
      lam.size() < prob.grid()->node_count())
    throw std::invalid_argument("spectrum window too small to count the index");
  IndexPair out;
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    const double nu = prob.epsilon() * lam[k] + fp;
    if (nu < -tol)
      ++out.index;
    else if (nu <= tol)
      ++out.nullity;
  }
  return out;
}

std::vector<SingularEpsilon> singular_epsilons(const SpectrumResult& lap_spec, const Potential& p,
                                               double eps_lo, double eps_hi) {
  if (!(eps_lo > 0.0) || !(eps_hi > eps_lo))
    throw std::invalid_argument("epsilon range must satisfy 0 < lo < hi");
  if (lap_spec.eigenvalues.size() == 0) throw std::invalid_argument("empty spectrum");
  std::vector<SingularEpsilon> out;
  const double lam_scale = std::max(1.0, std::abs(lap_spec.eigenvalues[lap_spec.eigenvalues.size() - 1]));
  for (const PotentialZero& z : p.zeros()) {
    if (z.fprime >= 0.0) continue;
    for (Eigen::Index k = 0; k < lap_spec.eigenvalues.size(); ++k) {
      const double lam = lap_spec.eigenvalues[k];
      if (lam <= 1e-12 * lam_scale) continue;  // the zero mode never degenerates constants
      const double eps = -z.fprime / lam;
      if (eps > eps_lo && eps < eps_hi) out.push_back({eps, z.location, lam});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const SingularEpsilon& a, const SingularEpsilon& b) { return a.epsilon < b.epsilon; });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const SingularEpsilon& a, const SingularEpsilon& b) {
                          return std::abs(a.epsilon - b.epsilon) <=
                                 1e-9 * std::max(1.0, std::abs(a.epsilon));
                        }),
            out.end());
  return out;
}

double eigenvalue_derivative_unchecked(const Problem& prob, const SymTensorField& A,
                                       const ScalarField& phi0) {
  const ScalarField dphi = apply_perturbed_laplacian(A, phi0, *prob.metric());
  return prob.epsilon() * dot_w(dphi.values, phi0.values, prob.weights());
}

double eigenvalue_derivative(const Problem& prob, const SymTensorField& A,
                             const ScalarField& phi0) {
  const Eigen::VectorXd& w = prob.weights();
  const double nrm = norm_w(phi0.values, w);
  if (std::abs(nrm - 1.0) > 1e-8)
    throw std::invalid_argument("phi0 must be normalized in the weighted inner product");

  // phi0 must be an eigenfield of -Delta_g ...
  const LinearOperator minus_lap = prob.laplacian().scaled(-1.0);
  const double mu = minus_lap.form_product(phi0.values, phi0.values);
  const Eigen::VectorXd r = minus_lap.apply(phi0.values) - mu * phi0.values;
  if (norm_w(r, w) > 1e-6 * std::max(1.0, std::abs(mu)))
    throw std::invalid_argument("phi0 is not an eigenfield of the Laplacian");

  // ... and its eigenvalue must be simple within the cluster tolerance.
  const Eigen::Index n = minus_lap.size();
  int m = static_cast<int>(std::min<Eigen::Index>(n, 16));
  SpectrumResult spec;
  for (;;) {
    spec = eigen_solve(minus_lap, m);
    const double top = spec.eigenvalues[m - 1];
    if (top > mu + 10.0 * spec.cluster_tol * std::max(1.0, std::abs(mu)) || m == n) break;
    m = static_cast<int>(std::min<Eigen::Index>(n, 2 * m));
  }
  int pos = -1;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    const double d = std::abs(spec.eigenvalues[i] - mu);
    if (d < best) {
      best = d;
      pos = i;
    }
  }
  if (pos < 0 || best > spec.cluster_tol * std::max(1.0, std::abs(mu)))
    throw std::invalid_argument("phi0's eigenvalue was not located in the spectrum");
  if (!spec.is_simple(pos))
    throw std::invalid_argument("eigenvalue is not simple; the first-order formula needs a simple eigenvalue");
  return eigenvalue_derivative_unchecked(prob, A, phi0);
}

}  // namespace acmorse
