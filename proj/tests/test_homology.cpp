#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "acmorse/flow.hpp"
#include "acmorse/homology.hpp"
#include "oracles.hpp"

using namespace acmorse;

namespace {

Problem circle_problem(int n, double eps,
                       std::shared_ptr<const Potential> pot = nullptr) {
  auto g = TorusGrid::make(1, {2.0 * M_PI}, {n});
  if (!pot) pot = std::make_shared<Potential>(Potential::cubic());
  return Problem::make(g, MetricField::euclidean(g), pot, eps);
}

std::vector<SolutionPoint> constant_states(const Problem& prob) {
  std::vector<SolutionPoint> out;
  for (const auto& z : prob.potential().zeros())
    out.push_back(classify_solution(prob, ScalarField::constant(prob.grid(), z.location),
                                    "constant " + std::to_string(z.location)));
  return out;
}

// synthetic nondegenerate solution record for pure chain-level tests
SolutionPoint fake_solution(GridPtr g, double value, int index, const std::string& tag) {
  SolutionPoint s;
  s.epsilon = 1.0;
  s.u = ScalarField::constant(g, value);
  s.residual_norm = 0.0;
  s.index = index;
  s.nullity = 0;
  s.energy = value;
  s.tag = tag;
  return s;
}

}  // namespace

TEST_CASE("mod-2 matrix algebra") {
  Z2Matrix a(2, 3);
  CHECK(a.is_zero());
  a.set(0, 0, 1);
  a.set(0, 2, 3);  // odd values reduce to 1
  a.set(1, 1, 2);  // even values reduce to 0
  CHECK(a(0, 0) == 1);
  CHECK(a(0, 2) == 1);
  CHECK(a(1, 1) == 0);
  CHECK(!a.is_zero());

  Z2Matrix b(3, 2);
  b.set(0, 0, 1);
  b.set(2, 0, 1);
  b.set(1, 1, 1);
  Z2Matrix ab = a.times(b);
  REQUIRE(ab.rows() == 2);
  REQUIRE(ab.cols() == 2);
  // row 0 of a is (1,0,1), columns of b are (1,0,1) and (0,1,0)
  CHECK(ab(0, 0) == 0);  // 1+1 = 0 over Z2
  CHECK(ab(0, 1) == 0);
  CHECK(ab(1, 0) == 0);
  CHECK(ab(1, 1) == 0);
  CHECK(ab.is_zero());

  CHECK_THROWS_AS(b.times(Z2Matrix(3, 3)), std::invalid_argument);
}

TEST_CASE("mod-2 rank by elimination") {
  Z2Matrix id(3, 3);
  for (int i = 0; i < 3; ++i) id.set(i, i, 1);
  CHECK(id.rank() == 3);

  Z2Matrix sing(2, 2);
  sing.set(0, 0, 1);
  sing.set(0, 1, 1);
  sing.set(1, 0, 1);
  sing.set(1, 1, 1);
  CHECK(sing.rank() == 1);

  CHECK(Z2Matrix(4, 2).rank() == 0);
  CHECK(Z2Matrix(0, 5).rank() == 0);

  // row space and column space have equal dimension: check via a rectangular
  // example where over the integers the ranks would be easy to confuse
  Z2Matrix m(3, 4);
  m.set(0, 0, 1);
  m.set(0, 1, 1);
  m.set(1, 1, 1);
  m.set(1, 2, 1);
  m.set(2, 0, 1);
  m.set(2, 2, 1);  // row2 = row0 + row1 over Z2
  CHECK(m.rank() == 2);

  // rank is subadditive under products
  Z2Matrix n(4, 3);
  n.set(0, 0, 1);
  n.set(1, 1, 1);
  n.set(2, 2, 1);
  n.set(3, 0, 1);
  CHECK(m.times(n).rank() <= 2);
}

TEST_CASE("complex assembly buckets by index and fills boundaries") {
  auto prob = circle_problem(48, 3.0);
  auto all = constant_states(prob);  // -1 (index 0), 0 (index 1), 1 (index 0)
  std::vector<ConnectionRecord> counts;
  counts.push_back({1, 0, 1, true});
  counts.push_back({1, 2, 1, true});

  auto cx = assemble_complex(all, counts);
  REQUIRE(cx.generators.size() == 2);
  CHECK(cx.generators[0].size() == 2);
  CHECK(cx.generators[1].size() == 1);
  CHECK(cx.generator_ids[0][0] == 0);
  CHECK(cx.generator_ids[0][1] == 2);
  CHECK(cx.generator_ids[1][0] == 1);

  REQUIRE(cx.boundaries.size() == 2);
  CHECK(cx.boundaries[0].rows() == 0);
  CHECK(cx.boundaries[0].cols() == 2);
  REQUIRE(cx.boundaries[1].rows() == 2);
  REQUIRE(cx.boundaries[1].cols() == 1);
  CHECK(cx.boundaries[1](0, 0) == 1);
  CHECK(cx.boundaries[1](1, 0) == 1);
  CHECK(cx.reliability[1] == "exact");

  auto ranks = homology_ranks(cx);
  REQUIRE(ranks.size() == 2);
  CHECK(ranks[0] == 1);
  CHECK(ranks[1] == 0);
}

TEST_CASE("missing and sampled counts downgrade reliability") {
  auto prob = circle_problem(48, 3.0);
  auto all = constant_states(prob);

  // one of the two needed records is absent: incomplete, homology refused
  {
    std::vector<ConnectionRecord> counts{{1, 0, 1, true}};
    auto cx = assemble_complex(all, counts);
    CHECK(cx.reliability[1] == "incomplete");
    CHECK_THROWS_AS(homology_ranks(cx), std::invalid_argument);
    CHECK_THROWS_AS(homology_ranks(cx, true), std::invalid_argument);
  }

  // a non-exact record: heuristic, gated behind the explicit opt-in
  {
    std::vector<ConnectionRecord> counts{{1, 0, 1, true}, {1, 2, 1, false}};
    auto cx = assemble_complex(all, counts);
    CHECK(cx.reliability[1] == "heuristic");
    CHECK_THROWS_AS(homology_ranks(cx), std::invalid_argument);
    auto ranks = homology_ranks(cx, true);
    CHECK(ranks[0] == 1);
    CHECK(ranks[1] == 0);
  }
}

TEST_CASE("degenerate members cannot generate a chain complex") {
  auto prob = circle_problem(64, 0.4);
  auto res = newton_solve(prob, ScalarField::from_function(prob.grid(), [](const std::array<double, 3>& x) {
                            return 0.9 * std::cos(x[0]);
                          }),
                          "hump");
  REQUIRE(res.converged);
  REQUIRE(res.point.nullity == 1);  // translation degeneracy
  std::vector<SolutionPoint> bad{res.point};
  CHECK_THROWS_WITH_AS(assemble_complex(bad, {}), doctest::Contains("hump"),
                       std::invalid_argument);
}

TEST_CASE("a broken boundary square is caught, not propagated") {
  auto g = TorusGrid::make(1, {2.0 * M_PI}, {8});
  std::vector<SolutionPoint> sols;
  sols.push_back(fake_solution(g, 0.0, 0, "p"));
  sols.push_back(fake_solution(g, 1.0, 1, "a"));
  sols.push_back(fake_solution(g, 2.0, 2, "x"));
  std::vector<ConnectionRecord> counts;
  counts.push_back({1, 0, 1, true});  // d1(a) = p
  counts.push_back({2, 1, 1, true});  // d2(x) = a, so d1 d2 (x) = p != 0
  auto cx = assemble_complex(sols, counts);
  CHECK_THROWS_AS(homology_ranks(cx), std::invalid_argument);
}

TEST_CASE("empty complexes have empty homology") {
  auto cx = assemble_complex({}, {});
  CHECK(homology_ranks(cx).empty());
}

TEST_CASE("real connection counts assemble the five-well complex") {
  auto quintic = std::make_shared<Potential>(
      Potential::from_coefficients({0.0, 1.0, 0.0, -1.25, 0.0, 0.25}));
  auto prob = circle_problem(48, 8.0, quintic);
  auto all = constant_states(prob);  // -2, -1, 0, 1, 2 with indices 0,1,0,1,0

  std::vector<ConnectionRecord> counts;
  for (std::size_t from : {1u, 3u}) {
    for (std::size_t to : {0u, 2u, 4u}) {
      auto c = connection_count_mod2(prob, all, from, to, 0, 13);
      counts.push_back({from, to, c.parity, c.exact});
    }
  }
  auto cx = assemble_complex(all, counts);
  REQUIRE(cx.generators.size() == 2);
  REQUIRE(cx.boundaries[1].rows() == 3);
  REQUIRE(cx.boundaries[1].cols() == 2);
  CHECK(cx.reliability[1] == "exact");

  // saddles connect only to their adjacent wells
  // rows follow generator order -2, 0, 2; columns -1, 1
  CHECK(cx.boundaries[1](0, 0) == 1);
  CHECK(cx.boundaries[1](1, 0) == 1);
  CHECK(cx.boundaries[1](2, 0) == 0);
  CHECK(cx.boundaries[1](0, 1) == 0);
  CHECK(cx.boundaries[1](1, 1) == 1);
  CHECK(cx.boundaries[1](2, 1) == 1);

  auto ranks = homology_ranks(cx);
  CHECK(ranks[0] == 1);
  CHECK(ranks[1] == 0);
}

TEST_CASE("parity report checks bucket cardinalities against the expected degree") {
  auto prob = circle_problem(64, 0.4);
  auto set = solution_sweep(prob, 100, 1);
  const int l = 3;  // index of the zero solution at this epsilon
  auto rep = parity_report(set, l, prob.weights());
  CHECK(rep.verdict == "PASS");
  CHECK(rep.l == 3);
  REQUIRE(rep.counts.size() >= 4);
  CHECK(rep.counts[0] == 2);      // the two wells
  CHECK(rep.counts[3] == 1);      // the zero solution alone in degree l
  CHECK(rep.counts[1] % 2 == 0);
  CHECK(rep.counts[2] % 2 == 0);
  CHECK(rep.failures.empty());
  CHECK(!rep.to_text().empty());

  // removing the zero solution flips the degree-l parity
  {
    auto broken = set;
    for (std::size_t i = 0; i < broken.size(); ++i)
      if (broken[i].u.sup_norm() <= 1e-8) {
        broken.erase(broken.begin() + i);
        break;
      }
    auto bad = parity_report(broken, l, prob.weights());
    CHECK(bad.verdict == "FAIL");
    bool flagged = false;
    for (const auto& f : bad.failures)
      if (f.find("degree 3") != std::string::npos) flagged = true;
    CHECK(flagged);
  }

  // removing one nonconstant member leaves an unpaired witness
  {
    auto broken = set;
    for (std::size_t i = 0; i < broken.size(); ++i)
      if (broken[i].u.sup_norm() > 1e-6 && broken[i].nullity > 0) {
        broken.erase(broken.begin() + i);
        break;
      }
    auto bad = parity_report(broken, l, prob.weights());
    CHECK(bad.verdict == "FAIL");
    bool witness = false;
    for (const auto& f : bad.failures)
      if (f.find("unpaired") != std::string::npos) witness = true;
    CHECK(witness);
  }
}
