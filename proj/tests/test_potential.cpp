#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "acmorse/potential.hpp"

using namespace acmorse;

TEST_CASE("the cubic has the double-well structure") {
  auto p = Potential::cubic();
  CHECK(p.degree() == 3);
  CHECK(p.f(2.0) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(p.fprime(2.0) == doctest::Approx(11.0).epsilon(1e-15));
  CHECK(p.F(1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(p.F(-1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(p.F(0.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(p.T0() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.is_odd());

  const auto& z = p.zeros();
  REQUIRE(z.size() == 3);
  CHECK(z[0].location == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(z[1].location == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(z[2].location == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(z[0].sign_fprime == 1);
  CHECK(z[1].sign_fprime == -1);
  CHECK(z[2].sign_fprime == 1);
  CHECK(z[1].fprime == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("a five-zero odd potential is classified with alternating slopes") {
  // f(u) = 0.25 u (u^2 - 1)(u^2 - 4)
  auto p = Potential::from_coefficients({0.0, 1.0, 0.0, -1.25, 0.0, 0.25});
  CHECK(p.degree() == 5);
  CHECK(p.is_odd());
  CHECK(p.T0() == doctest::Approx(2.0).epsilon(1e-12));

  const auto& z = p.zeros();
  REQUIRE(z.size() == 5);
  const double locs[5] = {-2.0, -1.0, 0.0, 1.0, 2.0};
  const int signs[5] = {1, -1, 1, -1, 1};
  for (int i = 0; i < 5; ++i) {
    CHECK(z[i].location == doctest::Approx(locs[i]).epsilon(1e-10));
    CHECK(z[i].sign_fprime == signs[i]);
    CHECK(std::abs(p.f(z[i].location)) <= 1e-10);
  }

  // primitive normalized to vanish at the deepest wells, u = +-2
  CHECK(p.F(2.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.F(-2.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.F(0.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(p.F(1.0) == doctest::Approx(9.0 / 16.0).epsilon(1e-12));
}

TEST_CASE("single-zero potentials are admissible") {
  auto p = Potential::from_coefficients({0.0, 1.0, 0.0, 1.0});  // u^3 + u
  REQUIRE(p.zeros().size() == 1);
  CHECK(p.zeros()[0].location == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.zeros()[0].sign_fprime == 1);
  CHECK(p.T0() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("asymmetric potentials lose oddness but keep admissibility") {
  auto p = Potential::from_coefficients({0.1, -1.0, 0.0, 1.0});  // u^3 - u + 0.1
  CHECK(!p.is_odd());
  REQUIRE(p.zeros().size() == 3);
  for (const auto& z : p.zeros()) CHECK(std::abs(p.f(z.location)) <= 1e-12);
  // middle zero shifted off the origin
  CHECK(p.zeros()[1].location > 0.05);
  CHECK(p.zeros()[1].location < 0.15);
}

TEST_CASE("inadmissible potentials are rejected with reasons") {
  // wrong growth: leading coefficient negative
  CHECK_THROWS_AS(Potential::from_coefficients({0.0, 1.0, 0.0, -1.0}), std::invalid_argument);
  // wrong growth: even leading degree
  CHECK_THROWS_AS(Potential::from_coefficients({-1.0, 0.0, 1.0}), std::invalid_argument);
  // degenerate zero: triple zero at the origin
  CHECK_THROWS_AS(Potential::from_coefficients({0.0, 0.0, 0.0, 1.0}), std::invalid_argument);
  // degenerate zeros: double wells touching zero, f = u (u^2-1)^2
  CHECK_THROWS_AS(Potential::from_coefficients({0.0, 1.0, 0.0, -2.0, 0.0, 1.0}),
                  std::invalid_argument);
  // empty / constant input
  CHECK_THROWS_AS(Potential::from_coefficients({}), std::invalid_argument);
  CHECK_THROWS_AS(Potential::from_coefficients({1.0}), std::invalid_argument);
}

TEST_CASE("the primitive is the running integral of f") {
  auto p = Potential::from_coefficients({0.1, -1.0, 0.0, 1.0});
  // F(t) - F(0) = t^4/4 - t^2/2 + 0.1 t exactly
  for (double t : {-1.7, -0.3, 0.0, 0.4, 1.9}) {
    const double expect = 0.25 * t * t * t * t - 0.5 * t * t + 0.1 * t;
    CHECK(p.F(t) - p.F(0.0) == doctest::Approx(expect).epsilon(1e-13));
  }
}

TEST_CASE("fprime_sup takes interior critical points into account") {
  auto p = Potential::cubic();  // f' = 3t^2 - 1
  CHECK(p.fprime_sup(-1.0, 1.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(p.fprime_sup(0.0, 0.5) == doctest::Approx(1.0).epsilon(1e-12));  // |f'(0)| = 1
  CHECK(p.fprime_sup(0.7, 2.0) == doctest::Approx(11.0).epsilon(1e-12));

  auto q = Potential::from_coefficients({0.0, 1.0, 0.0, -1.25, 0.0, 0.25});
  // f' = 1.25 t^4 - 3.75 t^2 + 1 has interior minima at t^2 = 1.5, value -1.8125
  CHECK(q.fprime_sup(-2.0, 2.0) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(q.fprime_sup(-1.3, 1.3) == doctest::Approx(1.8125).epsilon(1e-12));
}

TEST_CASE("classify_zeros agrees with the constructor's cached structure") {
  auto p = Potential::from_coefficients({0.0, 1.0, 0.0, -1.25, 0.0, 0.25});
  auto z = classify_zeros(p);
  REQUIRE(z.size() == p.zeros().size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    CHECK(z[i].location == doctest::Approx(p.zeros()[i].location).epsilon(1e-12));
    CHECK(z[i].sign_fprime == p.zeros()[i].sign_fprime);
  }
}
