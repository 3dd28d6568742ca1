#include "lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/SparseCholesky>

namespace acmorse::detail {

namespace {

// Gershgorin interval of a sparse symmetric matrix.
void gershgorin(const Eigen::SparseMatrix<double>& S, double& lo, double& hi) {
  const Eigen::Index n = S.rows();
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n), off = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < S.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(S, k); it; ++it) {
      if (it.row() == it.col())
        diag[it.row()] = it.value();
      else
        off[it.row()] += std::abs(it.value());
    }
  lo = (diag - off).minCoeff();
  hi = (diag + off).maxCoeff();
}

void orthogonalize(Eigen::VectorXd& w, const Eigen::MatrixXd& basis, Eigen::Index cols) {
  if (cols == 0) return;
  const auto B = basis.leftCols(cols);
  w.noalias() -= B * (B.transpose() * w);
}

}  // namespace

void smallest_eigenpairs(const Eigen::SparseMatrix<double>& S, int m, Eigen::VectorXd& values,
                         Eigen::MatrixXd& vectors, std::uint64_t seed) {
  const Eigen::Index n = S.rows();
  if (m < 1 || m > n) throw std::invalid_argument("eigenpair count out of range");

  double lo = 0.0, hi = 0.0;
  gershgorin(S, lo, hi);
  const double spread = std::max(hi - lo, 1.0);
  // Shift just below the lower Gershgorin bound. The offset must scale with
  // the bottom of the spectrum, not the spread: a spread-sized offset pushes
  // the shift so far out that the wanted eigenvalues land in one tight
  // shift-inverted cluster and the iteration cannot separate them.
  const double offset = 0.05 * std::max(1.0, std::abs(lo));
  double sigma = lo - offset;

  Eigen::SparseMatrix<double> ident(n, n);
  ident.setIdentity();
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> fact;
  for (int attempt = 0;; ++attempt) {
    Eigen::SparseMatrix<double> shifted = S - sigma * ident;
    fact.compute(shifted);
    if (fact.info() == Eigen::Success && fact.vectorD().minCoeff() > 0.0) break;
    if (attempt >= 4) throw std::runtime_error("shift-invert factorization failed");
    sigma -= std::pow(4.0, attempt) * (attempt >= 2 ? 1e-2 * spread : offset);
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Converged Ritz vectors (columns 0..nconv). Capacity exceeds m because a
  // run may only deliver one vector per distinct eigenvalue: degenerate
  // copies arrive through deflated restarts, and runs confirming that no
  // eigenvalue below the current m-th remains can land values above it.
  const int cap = m + 8;
  Eigen::MatrixXd conv(n, cap);
  std::vector<double> conv_theta;  // shift-inverted values, aligned with conv
  int nconv = 0;
  int stagnant_runs = 0;
  int confirmations = 0;

  // m-th largest converged theta = m-th smallest eigenvalue so far.
  const auto kth_theta = [&]() {
    std::vector<double> t(conv_theta);
    std::nth_element(t.begin(), t.begin() + (m - 1), t.end(), std::greater<double>());
    return t[m - 1];
  };

  while (nconv < m || (confirmations < 2 && nconv < n)) {
    const double cutoff = nconv >= m ? kth_theta() : 0.0;
    const int want = nconv < m ? m - nconv : 1;
    const int kmax = static_cast<int>(std::min<Eigen::Index>(
        n - nconv, std::max(60, 2 * want + 40)));

    Eigen::MatrixXd V(n, kmax + 1);
    Eigen::VectorXd alpha(kmax), beta(kmax);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = gauss(rng);
    orthogonalize(v, conv, nconv);
    const double v0n = v.norm();
    if (v0n < 1e-12) continue;  // unlucky draw inside the converged span; regenerate
    V.col(0) = v / v0n;

    int k = 0;
    int new_this_run = 0;
    bool entered_bottom_set = false;
    for (; k < kmax; ++k) {
      Eigen::VectorXd w = fact.solve(V.col(k));
      if (k > 0) w -= beta[k - 1] * V.col(k - 1);
      alpha[k] = V.col(k).dot(w);
      w -= alpha[k] * V.col(k);
      // Full reorthogonalization, two passes, against both the current
      // Krylov basis and previously converged vectors.
      for (int pass = 0; pass < 2; ++pass) {
        orthogonalize(w, V, k + 1);
        orthogonalize(w, conv, nconv);
      }
      beta[k] = w.norm();
      const bool breakdown = beta[k] < 1e-13 * std::max(1.0, std::abs(alpha[k]));
      if (!breakdown) V.col(k + 1) = w / beta[k];

      const bool check_now = breakdown || k + 1 == kmax || (k >= want && (k % 5 == 4));
      if (check_now) {
        const int kk = k + 1;
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(kk, kk);
        for (int i = 0; i < kk; ++i) {
          T(i, i) = alpha[i];
          if (i + 1 < kk) T(i, i + 1) = T(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tes(T);
        const Eigen::VectorXd& theta = tes.eigenvalues();  // ascending
        int ready = 0;
        for (int j = kk - 1; j >= 0 && ready < want; --j) {
          const double th = theta[j];
          if (th <= 0.0) break;  // only the positive (smallest-lambda) end is wanted
          const double bound = breakdown ? 0.0 : std::abs(beta[k] * tes.eigenvectors()(kk - 1, j));
          if (bound <= 1e-12 * th)
            ++ready;
          else
            break;
        }
        if (ready == want || breakdown || k + 1 == kmax) {
          const int take = std::min(ready, cap - nconv);
          for (int j = kk - 1, taken = 0; j >= 0 && taken < take; --j, ++taken) {
            Eigen::VectorXd x = V.leftCols(kk) * tes.eigenvectors().col(j);
            orthogonalize(x, conv, nconv);  // guard against cross-run drift
            const double xn = x.norm();
            if (xn < 1e-8) continue;
            conv.col(nconv) = x / xn;
            conv_theta.push_back(theta[j]);
            if (cutoff > 0.0 && theta[j] > cutoff * (1.0 + 1e-9)) entered_bottom_set = true;
            ++nconv;
            ++new_this_run;
          }
          if (take > 0 || breakdown) break;
        }
        if (breakdown) break;
      }
    }

    stagnant_runs = new_this_run == 0 ? stagnant_runs + 1 : 0;
    if (stagnant_runs >= 3)
      throw std::runtime_error("eigenvalue solver: iteration budget exhausted without convergence");
    if (cutoff > 0.0 && new_this_run > 0) {
      // A deflated restart converges the smallest remaining eigenvalue first,
      // so a run whose new values all sit above the m-th confirms the bottom
      // set is complete; one that lands below it found a missing copy.
      confirmations = entered_bottom_set ? 0 : confirmations + 1;
    }
  }

  // Block Rayleigh-Ritz refinement in the original matrix: rotate the
  // converged subspace of the m smallest values to S-eigenvectors and polish
  // with shift-inverted subspace iteration until the residual target is met.
  std::vector<int> order(nconv);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return conv_theta[a] > conv_theta[b]; });
  Eigen::MatrixXd X(n, m);
  for (int j = 0; j < m; ++j) X.col(j) = conv.col(order[j]);
  const double floor_res = 1e-15 * spread;  // attainable accuracy scales with ||S||
  for (int round = 0; round < 8; ++round) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    X = qr.householderQ() * Eigen::MatrixXd::Identity(n, m);
    Eigen::MatrixXd SX = S * X;
    Eigen::MatrixXd P = X.transpose() * SX;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> pes(P);
    X = X * pes.eigenvectors();
    SX = SX * pes.eigenvectors();
    values = pes.eigenvalues();
    double worst = 0.0;
    for (int j = 0; j < m; ++j) {
      const double res = (SX.col(j) - values[j] * X.col(j)).norm();
      worst = std::max(worst, res / std::max(1.0, std::abs(values[j])));
    }
    if (worst <= std::max(1e-10, floor_res)) break;
    for (int j = 0; j < m; ++j) X.col(j) = fact.solve(X.col(j)).eval();
  }
  vectors = X;
}

}  // namespace acmorse::detail
