#include "acmorse/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace acmorse {

namespace {

double horner(const std::vector<double>& c, double t) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * t + *it;
  return v;
}

std::vector<double> derivative(const std::vector<double>& c) {
  std::vector<double> d;
  for (std::size_t k = 1; k < c.size(); ++k) d.push_back(static_cast<double>(k) * c[k]);
  if (d.empty()) d.push_back(0.0);
  return d;
}

std::vector<double> antiderivative(const std::vector<double>& c) {
  std::vector<double> p(c.size() + 1, 0.0);
  for (std::size_t k = 0; k < c.size(); ++k) p[k + 1] = c[k] / static_cast<double>(k + 1);
  return p;
}

// Real roots by companion-matrix eigenvalues, polished by Newton steps.
std::vector<double> real_roots(const std::vector<double>& c) {
  std::vector<double> cc = c;
  while (cc.size() > 1 && cc.back() == 0.0) cc.pop_back();
  const int deg = static_cast<int>(cc.size()) - 1;
  if (deg < 1) return {};
  double scale = 0.0;
  for (double a : cc) scale = std::max(scale, std::abs(a));
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -cc[i] / cc[deg];
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp);
  const auto dp = derivative(cc);
  std::vector<double> roots;
  for (int i = 0; i < deg; ++i) {
    const std::complex<double> z = es.eigenvalues()[i];
    if (std::abs(z.imag()) > 1e-9 * (1.0 + std::abs(z.real()))) continue;
    double r = z.real();
    for (int it = 0; it < 4; ++it) {
      const double fr = horner(cc, r), fpr = horner(dp, r);
      if (fpr == 0.0) break;
      r -= fr / fpr;
    }
    if (std::abs(horner(cc, r)) <= 1e-9 * (1.0 + scale)) roots.push_back(r);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace

Potential Potential::cubic() { return from_coefficients({0.0, -1.0, 0.0, 1.0}); }

Potential Potential::from_coefficients(std::vector<double> coeffs) {
  while (coeffs.size() > 1 && coeffs.back() == 0.0) coeffs.pop_back();
  if (coeffs.size() < 2) throw std::invalid_argument("potential must be a nonconstant polynomial");
  const int deg = static_cast<int>(coeffs.size()) - 1;
  if (deg % 2 == 0 || coeffs.back() <= 0.0)
    throw std::invalid_argument(
        "potential needs odd leading degree and positive leading coefficient");

  Potential p;
  p.coeffs_ = std::move(coeffs);
  p.fp_ = derivative(p.coeffs_);
  p.prim_ = antiderivative(p.coeffs_);

  const auto roots = real_roots(p.coeffs_);
  if (roots.empty()) throw std::invalid_argument("potential has no real zeros");
  // Nondegeneracy first: a repeated root reports as degenerate, not as a
  // miscounted zero list.
  std::vector<PotentialZero> zs;
  for (double r : roots) {
    if (!zs.empty() && std::abs(r - zs.back().location) <= 1e-8 * (1.0 + std::abs(r)))
      throw std::invalid_argument("potential has a degenerate (repeated) zero");
    const double slope = horner(p.fp_, r);
    if (std::abs(slope) <= 1e-8)
      throw std::invalid_argument("potential has a degenerate zero (|f'| <= 1e-8)");
    zs.push_back({r, slope, slope > 0.0 ? +1 : -1});
  }
  if (zs.size() % 2 == 0) throw std::invalid_argument("potential has an even number of zeros");
  for (std::size_t k = 0; k < zs.size(); ++k) {
    const int expected = (k % 2 == 0) ? +1 : -1;  // +,-,+,...,+
    if (zs[k].sign_fprime != expected)
      throw std::invalid_argument("potential zero slopes do not alternate starting with +");
  }
  p.zeros_ = std::move(zs);
  p.t0_ = std::max(std::abs(p.zeros_.front().location), std::abs(p.zeros_.back().location));

  // F = int_0^t f shifted so the global-minimum zeros sit at F = 0.
  double fmin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < p.zeros_.size(); k += 2)
    fmin = std::min(fmin, horner(p.prim_, p.zeros_[k].location));
  p.f_offset_ = -fmin;
  return p;
}

double Potential::f(double t) const { return horner(coeffs_, t); }
double Potential::fprime(double t) const { return horner(fp_, t); }
double Potential::F(double t) const { return horner(prim_, t) + f_offset_; }

bool Potential::is_odd() const {
  double scale = 0.0;
  for (double a : coeffs_) scale = std::max(scale, std::abs(a));
  for (std::size_t k = 0; k < coeffs_.size(); k += 2)
    if (std::abs(coeffs_[k]) > 1e-14 * scale) return false;
  return true;
}

double Potential::fprime_sup(double lo, double hi) const {
  if (lo > hi) std::swap(lo, hi);
  double sup = std::max(std::abs(fprime(lo)), std::abs(fprime(hi)));
  for (double r : real_roots(derivative(fp_)))
    if (r >= lo && r <= hi) sup = std::max(sup, std::abs(fprime(r)));
  return sup;
}

std::vector<PotentialZero> classify_zeros(const Potential& p) { return p.zeros(); }

}  // namespace acmorse
