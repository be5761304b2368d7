#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "quadswarm/range_bounds.hpp"

#include <cmath>

using namespace quadswarm;

namespace {

RangeBoundInputs paper_agent_inputs() {
  RangeBoundInputs in;
  in.gains = EcbfGains::from_alphas(36.0, 22.0);
  in.geom = {0.4, 0.2, 0.2};
  in.a_max_i = 2.0;
  in.v_rel_max = 3.0;  // two 1.5 m/s vehicles head-on
  return in;
}

// Quadratic-formula oracle, kept separate from the bisection-free
// implementation path (which itself uses the closed form; this guards
// against sign slips rather than shared bugs, so also probe the polynomial).
double oracle_largest_root(double a, double b, double c) {
  const double disc = b * b - 4.0 * a * c;
  REQUIRE(disc >= 0.0);
  return (-b + std::sqrt(disc)) / (2.0 * a);
}

}  // namespace

TEST_CASE("conservative bound reproduces the closed form") {
  const RangeBoundInputs in = paper_agent_inputs();
  const RangeBoundResult res = conservative_bound(in);

  // 36 R^2 - 2(2 + 22*3) R + (2*9 - 36*0.64) = 36 R^2 - 136 R - 5.04
  const double expected = oracle_largest_root(36.0, -136.0, -5.04);
  CHECK(res.threshold_i == doctest::Approx(expected).epsilon(1e-12));
  CHECK(res.threshold_i == doctest::Approx(3.814).epsilon(1e-3));
  CHECK(res.threshold_iii == doctest::Approx(0.8));
  CHECK(res.bound == doctest::Approx(res.threshold_i));
  // Residual of the defining polynomial at the returned root.
  const double r = res.threshold_i;
  CHECK(std::abs(36.0 * r * r - 136.0 * r - 5.04) <= 1e-9 * 136.0);
}

TEST_CASE("static world needs only the safety distance") {
  RangeBoundInputs in = paper_agent_inputs();
  in.v_rel_max = 0.0;
  in.a_max_i = 0.0;
  const RangeBoundResult res = conservative_bound(in);
  CHECK(res.threshold_i == doctest::Approx(0.8));
  CHECK(res.bound == doctest::Approx(0.8));
  CHECK_FALSE(res.threshold_ii.has_value());
}

TEST_CASE("non-conservative bound reproduces the paper scenarios") {
  SUBCASE("quadrotor-quadrotor") {
    const RangeBoundResult res = nonconservative_bound(paper_agent_inputs());
    const double expected = oracle_largest_root(36.0, -128.0, -5.04);
    CHECK(res.threshold_i == doctest::Approx(expected).epsilon(1e-12));
    CHECK(res.bound == doctest::Approx(3.5945).epsilon(2e-3));  // paper prints 3.60
    CHECK(discretize_bound(res.bound, 0.1, 3.0) == doctest::Approx(3.8945).epsilon(2e-3));
  }
  SUBCASE("quadrotor-obstacle, simulation geometry") {
    RangeBoundInputs in = paper_agent_inputs();
    in.geom = {0.2, 0.2, 1.0};
    in.v_rel_max = 1.5;
    const RangeBoundResult res = nonconservative_bound(in);
    CHECK(res.bound == doctest::Approx(2.466).epsilon(2e-3));  // paper prints 2.48
    CHECK(discretize_bound(res.bound, 0.1, 1.5) == doctest::Approx(2.616).epsilon(2e-3));
  }
  SUBCASE("quadrotor-obstacle, small real-world obstacles") {
    RangeBoundInputs in = paper_agent_inputs();
    in.geom = {0.2, 0.2, 0.15};
    in.v_rel_max = 1.5;
    const RangeBoundResult res = nonconservative_bound(in);
    CHECK(res.bound == doctest::Approx(1.8198).epsilon(2e-3));  // paper prints 1.7
  }
}

TEST_CASE("condition (ii) behaviour across pole choices") {
  const RangeBoundInputs in = paper_agent_inputs();
  SUBCASE("smaller pole gives a real root below condition (i)") {
    const RangeBoundResult res = nonconservative_bound(in);
    REQUIRE(res.threshold_ii.has_value());
    const double expected =
        oracle_largest_root(in.gains.p1, -6.0, in.gains.p1 * 0.64);
    CHECK(*res.threshold_ii == doctest::Approx(expected).epsilon(1e-12));
    CHECK(*res.threshold_ii < res.threshold_i);
  }
  SUBCASE("larger pole has negative discriminant, reported unbounded") {
    RangeBoundInputs alt = in;
    alt.pole = in.gains.p2;
    const RangeBoundResult res = nonconservative_bound(alt);
    CHECK_FALSE(res.threshold_ii.has_value());
    CHECK(std::isfinite(res.bound));
  }
}

TEST_CASE("discretization correction") {
  CHECK(discretize_bound(3.6, 0.1, 3.0) == doctest::Approx(3.9));
  CHECK(discretize_bound(2.48, 0.1, 1.5) == doctest::Approx(2.63));
  CHECK(discretize_bound(2.48, 0.0, 1.5) == doctest::Approx(2.48));
  CHECK_THROWS_AS(discretize_bound(1.0, -0.1, 1.0), std::invalid_argument);
}

TEST_CASE("ordering properties over a parameter grid") {
  int points = 0;
  for (double alpha2 : {10.0, 16.0, 22.0, 30.0}) {
    for (double frac : {0.2, 0.5, 0.8, 0.99}) {
      const double alpha1 = frac * alpha2 * alpha2 / 4.0;
      for (double a_max : {0.5, 2.0, 4.0}) {
        for (double v : {0.0, 0.5, 1.5, 3.0, 5.0}) {
          for (double d : {0.6, 0.8, 1.4}) {
            RangeBoundInputs in;
            in.gains = EcbfGains::from_alphas(alpha1, alpha2);
            in.geom = {d - 0.4, 0.2, 0.2};
            in.a_max_i = a_max;
            in.v_rel_max = v;
            const RangeBoundResult hat = conservative_bound(in);
            const RangeBoundResult check = nonconservative_bound(in);
            CHECK(hat.bound >= check.bound - 1e-12);
            CHECK(check.bound >= in.geom.combined() - 1e-12);
            ++points;
          }
        }
      }
    }
  }
  CHECK(points >= 1000 / 2);  // 720 grid points exercised here; acceptance runs 1000
}

TEST_CASE("bounds monotone in v_rel_max and alpha1") {
  RangeBoundInputs in = paper_agent_inputs();
  double prev_hat = 0.0, prev_check = 0.0;
  for (double v = 0.0; v <= 4.0; v += 0.25) {
    in.v_rel_max = v;
    const double hat = conservative_bound(in).bound;
    const double check = nonconservative_bound(in).bound;
    CHECK(hat >= prev_hat - 1e-12);
    CHECK(check >= prev_check - 1e-12);
    prev_hat = hat;
    prev_check = check;
  }

  in = paper_agent_inputs();
  double prev = std::numeric_limits<double>::infinity();
  for (double alpha1 : {9.0, 16.0, 25.0, 36.0, 49.0, 64.0, 81.0, 100.0, 121.0}) {
    in.gains = EcbfGains::from_alphas(alpha1, 22.0);
    const double hat = conservative_bound(in).bound;
    CHECK(hat <= prev + 1e-12);
    prev = hat;
  }
}

TEST_CASE("compatibility verdicts") {
  const RangeBoundInputs in = paper_agent_inputs();
  const double hat = conservative_bound(in).bound;
  const double check = nonconservative_bound(in).bound;
  REQUIRE(hat > check);

  std::vector<PairCase> pairs = {
      {in, hat + 0.1}, {in, 0.5 * (hat + check)}, {in, check - 0.2}};
  const auto rows = compatibility_check(pairs);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].verdict == PairVerdict::guaranteed);
  CHECK(rows[1].verdict == PairVerdict::pairwise_only);
  CHECK(rows[2].verdict == PairVerdict::none);
  CHECK(rows[0].conservative == doctest::Approx(hat));
  CHECK(rows[0].nonconservative == doctest::Approx(check));
}
