#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>

#include "acmorse/problem.hpp"
#include "acmorse/rng.hpp"
#include "oracles.hpp"

using namespace acmorse;

namespace {

Problem circle_problem(int n, double eps) {
  auto g = TorusGrid::make(1, {2.0 * M_PI}, {n});
  return Problem::make(g, MetricField::euclidean(g),
                       std::make_shared<Potential>(Potential::cubic()), eps);
}

ScalarField random_field(GridPtr g, Rng& rng, double amp) {
  Eigen::VectorXd v(g->node_count());
  for (std::int64_t i = 0; i < g->node_count(); ++i) v[i] = amp * rng.sym();
  return ScalarField(g, std::move(v));
}

}  // namespace

TEST_CASE("residuals vanish exactly at the potential's zeros") {
  auto prob = circle_problem(64, 0.7);
  for (double c : {-1.0, 0.0, 1.0}) {
    auto u = ScalarField::constant(prob.grid(), c);
    CHECK(prob.residual(u).sup_norm() == 0.0);
    CHECK(prob.residual_norm(u) == 0.0);
  }
  auto half = ScalarField::constant(prob.grid(), 0.5);
  // f(0.5) = -0.375, the laplacian term is zero on constants
  CHECK(prob.residual(half).values[3] == doctest::Approx(-0.375).epsilon(1e-15));
}

TEST_CASE("energy reproduces closed-form values on the circle") {
  const double eps = 0.4;
  auto prob = circle_problem(64, eps);

  // constant states carry F(c) * length
  auto zero = ScalarField::constant(prob.grid(), 0.0);
  CHECK(prob.energy(zero) == doctest::Approx(0.25 * 2.0 * M_PI).epsilon(1e-14));
  auto one = ScalarField::constant(prob.grid(), 1.0);
  CHECK(prob.energy(one) == doctest::Approx(0.0).epsilon(1e-14));

  // u = cos x: the gradient part uses the discrete mode eigenvalue exactly,
  // and the lattice sums of cos(2x), cos(4x) in F(cos x) vanish exactly
  auto u = ScalarField::from_function(
      prob.grid(), [](const std::array<double, 3>& x) { return std::cos(x[0]); });
  const double lam1 = oracles::axis_mode_eigenvalue(1, 64, 2.0 * M_PI);
  const double expect = 0.5 * eps * lam1 * M_PI + 3.0 * M_PI / 16.0;
  CHECK(prob.energy(u) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("the residual is the exact weighted gradient of the energy") {
  auto g2 = TorusGrid::make(2, {2.0 * M_PI, 2.0 * M_PI}, {12, 12});
  auto c = ScalarField::from_function(
      g2, [](const std::array<double, 3>& x) { return 1.0 + 0.2 * std::cos(x[0]) + 0.1 * std::sin(x[1]); });
  auto prob = Problem::make(g2, MetricField::conformal(g2, c),
                            std::make_shared<Potential>(Potential::cubic()), 0.6);

  Rng rng(11);
  auto u = random_field(g2, rng, 0.8);
  const double t = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    auto v = random_field(g2, rng, 1.0);
    ScalarField up(g2, u.values + t * v.values), dn(g2, u.values - t * v.values);
    const double fd = (prob.energy(up) - prob.energy(dn)) / (2.0 * t);
    const double pairing = dot_w(prob.residual(u).values, v.values, prob.weights());
    CHECK(fd == doctest::Approx(pairing).epsilon(1e-6));
  }
}

TEST_CASE("the hessian is the derivative of the residual") {
  auto prob = circle_problem(48, 0.9);
  Rng rng(5);
  auto u = random_field(prob.grid(), rng, 0.7);
  auto H = prob.hessian(u);

  // pointwise definition: -eps Delta v + f'(u) v
  auto v = random_field(prob.grid(), rng, 1.0);
  Eigen::VectorXd direct = -0.9 * prob.laplacian().apply(v.values);
  for (int i = 0; i < 48; ++i) direct[i] += prob.potential().fprime(u.values[i]) * v.values[i];
  CHECK((H.apply(v.values) - direct).cwiseAbs().maxCoeff() <= 1e-11);

  // directional finite difference of the residual
  const double t = 1e-6;
  ScalarField up(prob.grid(), u.values + t * v.values), dn(prob.grid(), u.values - t * v.values);
  Eigen::VectorXd fd = (prob.residual(up).values - prob.residual(dn).values) / (2.0 * t);
  CHECK((H.apply(v.values) - fd).cwiseAbs().maxCoeff() <= 1e-6);

  // self-adjointness in the weighted product survives the diagonal update
  auto w = random_field(prob.grid(), rng, 1.0);
  const double a = dot_w(H.apply(v.values), w.values, H.weights());
  const double b = dot_w(v.values, H.apply(w.values), H.weights());
  CHECK(std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(a)));
}

TEST_CASE("odd potentials give exactly odd residuals") {
  auto prob = circle_problem(32, 0.5);
  Rng rng(17);
  auto u = random_field(prob.grid(), rng, 1.3);
  ScalarField nu(prob.grid(), -u.values);
  Eigen::VectorXd sum = prob.residual(nu).values + prob.residual(u).values;
  CHECK(sum.cwiseAbs().maxCoeff() == 0.0);
  CHECK(prob.energy(nu) == prob.energy(u));
}

TEST_CASE("constant-state hessians match the generic assembly") {
  auto prob = circle_problem(40, 1.1);
  auto Hc = prob.hessian_at_constant(0.3);
  auto H = prob.hessian(ScalarField::constant(prob.grid(), 0.3));
  Rng rng(23);
  auto v = random_field(prob.grid(), rng, 1.0);
  CHECK((Hc.apply(v.values) - H.apply(v.values)).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK(prob.hessian_zero_tol_constant(0.3) ==
        doctest::Approx(prob.hessian_zero_tol(ScalarField::constant(prob.grid(), 0.3)))
            .epsilon(1e-12));
}

TEST_CASE("epsilon variation shares the assembled operator") {
  auto prob = circle_problem(32, 0.5);
  auto prob2 = prob.with_epsilon(2.0);
  CHECK(prob2.epsilon() == 2.0);
  CHECK(&prob2.laplacian().form() == &prob.laplacian().form());

  // only the gradient part of the energy scales with epsilon
  auto u = ScalarField::from_function(
      prob.grid(), [](const std::array<double, 3>& x) { return 0.3 * std::sin(x[0]); });
  const double e1 = prob.energy(u), e2 = prob2.energy(u);
  auto zero_grad = [&](const Problem& p) {
    double s = 0.0;
    for (int i = 0; i < 32; ++i) s += p.potential().F(u.values[i]) * p.weights()[i];
    return s;
  };
  const double pot = zero_grad(prob);
  CHECK((e2 - pot) == doctest::Approx(4.0 * (e1 - pot)).epsilon(1e-12));
}
