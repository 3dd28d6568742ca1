/// Closed-form and independently-integrated reference values used by the
/// test suites. Everything here is derived from first principles (Fourier
/// diagonalization of the stencil, scalar ODE integration) without touching
/// the library's own operators, so agreement is evidence, not tautology.

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace oracles {

/// Eigenvalue of the 1D periodic three-point stencil for the Fourier mode k
/// on N nodes over length L: (2/h^2)(1 - cos(2 pi k / N)).
inline double axis_mode_eigenvalue(int k, int N, double L) {
  const double h = L / N;
  return (2.0 / (h * h)) * (1.0 - std::cos(2.0 * M_PI * k / N));
}

/// Continuum counterpart sum_a (2 pi k_a / L_a)^2.
inline double continuum_eigenvalue(const std::vector<int>& k, const std::vector<double>& L) {
  double s = 0.0;
  for (std::size_t a = 0; a < k.size(); ++a) {
    const double w = 2.0 * M_PI * k[a] / L[a];
    s += w * w;
  }
  return s;
}

/// The full multiset of discrete Laplacian eigenvalues on a Euclidean torus
/// product, ascending; returns the first m.
inline std::vector<double> lattice_spectrum(const std::vector<int>& N,
                                            const std::vector<double>& L, int m) {
  std::vector<double> acc{0.0};
  for (std::size_t a = 0; a < N.size(); ++a) {
    std::vector<double> axis(N[a]);
    for (int k = 0; k < N[a]; ++k) axis[k] = axis_mode_eigenvalue(k, N[a], L[a]);
    std::vector<double> next;
    next.reserve(acc.size() * axis.size());
    for (double base : acc)
      for (double lam : axis) next.push_back(base + lam);
    acc = std::move(next);
  }
  std::sort(acc.begin(), acc.end());
  if (static_cast<int>(acc.size()) > m) acc.resize(m);
  return acc;
}

/// Amplitude of the even 2 pi periodic single-hump branch of
/// eps u'' = u^3 - u, found by shooting: integrate from (a, 0) over half a
/// period and bisect on u'(pi) = 0. Independent of every library component.
inline double shooting_amplitude(double eps) {
  const int steps = 20000;
  const double dx = M_PI / steps;
  auto end_slope = [&](double a) {
    double u = a, v = 0.0;
    for (int i = 0; i < steps; ++i) {
      auto fu = [&](double uu) { return (uu * uu * uu - uu) / eps; };
      const double k1u = v, k1v = fu(u);
      const double k2u = v + 0.5 * dx * k1v, k2v = fu(u + 0.5 * dx * k1u);
      const double k3u = v + 0.5 * dx * k2v, k3v = fu(u + 0.5 * dx * k2u);
      const double k4u = v + dx * k3v, k4v = fu(u + dx * k3u);
      u += dx / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
      v += dx / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    }
    return v;
  };
  double lo = 0.0, hi = 0.0, flo = 0.0;
  double prev_a = 0.05, prev_f = end_slope(0.05);
  for (double a = 0.075; a <= 0.9; a += 0.025) {
    const double fa = end_slope(a);
    if (prev_f * fa < 0.0) {
      lo = prev_a;
      hi = a;
      flo = prev_f;
      break;
    }
    prev_a = a;
    prev_f = fa;
  }
  if (hi == 0.0) throw std::runtime_error("shooting oracle found no sign change");
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = end_slope(mid);
    if (flo * fm <= 0.0)
      hi = mid;
    else {
      lo = mid;
      flo = fm;
    }
  }
  return 0.5 * (lo + hi);
}

/// Closed form of the scalar descent w' = w - w^3 from 0 to 1:
/// w(t) = (1 + e^{-2(t - t0)})^{-1/2}.
inline double cubic_heteroclinic(double t, double t0) {
  return 1.0 / std::sqrt(1.0 + std::exp(-2.0 * (t - t0)));
}

/// Time shift that puts the closed form through the sample (t, w).
inline double cubic_heteroclinic_shift(double t, double w) {
  return t + 0.5 * std::log(1.0 / (w * w) - 1.0);
}

}  // namespace oracles
