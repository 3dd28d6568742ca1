/// @file potential.hpp
/// The nonlinearity f, its primitive F, and the structure of its zeros.
///
/// Admissible potentials are polynomials with odd leading degree and positive
/// leading coefficient (so f(t) sign(t) -> +infinity natively), an odd number
/// of nondegenerate zeros c_1 < ... < c_{2n+1}, and alternating slopes
/// f'(c_k) > 0 for odd k, < 0 for even k. The primitive is normalized so that
/// F = 0 at the global-minimum zeros: F(t) = int_0^t f + const.

#pragma once

#include <vector>

namespace acmorse {

struct PotentialZero {
  double location;
  double fprime;     // slope of f at the zero
  int sign_fprime;   // +1 or -1, alternating
};

class Potential {
 public:
  /// f(u) = u^3 - u, F(u) = (u^2 - 1)^2 / 4.
  static Potential cubic();
  /// f(u) = sum_k coeffs[k] u^k. Rejects inadmissible potentials.
  static Potential from_coefficients(std::vector<double> coeffs);

  double f(double t) const;
  double fprime(double t) const;
  double F(double t) const;

  const std::vector<PotentialZero>& zeros() const { return zeros_; }
  /// Largest |c_k|; the a-priori bound on solution amplitudes.
  double T0() const { return t0_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  /// All coefficients of even powers vanish (within roundoff of the scale).
  bool is_odd() const;
  /// max |f'| on [lo, hi], exact via the critical points of f'.
  double fprime_sup(double lo, double hi) const;

 private:
  Potential() = default;
  std::vector<double> coeffs_;   // of f, ascending powers
  std::vector<double> fp_;       // of f'
  std::vector<double> prim_;     // of int_0^t f (constant term 0)
  double f_offset_ = 0.0;        // F = prim + offset
  std::vector<PotentialZero> zeros_;
  double t0_ = 0.0;
};

/// Ordered real zeros of an admissible potential with their f' signs.
/// Throws std::invalid_argument on: degenerate zero (|f'| <= 1e-8), even zero
/// count, non-alternating slopes, or wrong growth (leading degree even or
/// leading coefficient nonpositive).
std::vector<PotentialZero> classify_zeros(const Potential& p);

}  // namespace acmorse
