#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "quadswarm/ecbf.hpp"

#include <cmath>
#include <random>

using namespace quadswarm;

namespace {

// The section-V pair geometry: d_s = 0.4 and two 0.2 m vehicles.
SafetyGeometry paper_geom() { return {0.4, 0.2, 0.2}; }

EcbfGains paper_gains() { return EcbfGains::from_alphas(36.0, 22.0); }

RelativeState rel_from(const Eigen::Vector3d& p_rel, const Eigen::Vector3d& v_rel) {
  RelativeState r;
  r.p_rel = p_rel;
  r.v_rel = v_rel;
  return r;
}

// Largest root of a quadratic, solved by bisection rather than the closed
// form used in the implementation.
double bisect_largest_root(double a, double b, double c, double lo, double hi) {
  const auto f = [&](double x) { return (a * x + b) * x + c; };
  REQUIRE(f(lo) < 0.0);
  REQUIRE(f(hi) > 0.0);
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("pole computation") {
  SUBCASE("paper gains give real positive poles") {
    const EcbfGains g = paper_gains();
    // quadratic formula oracle: (22 -+ sqrt(340)) / 2
    const double root = std::sqrt(22.0 * 22.0 - 4.0 * 36.0);
    CHECK(g.p1 == doctest::Approx((22.0 - root) / 2.0).epsilon(1e-12));
    CHECK(g.p2 == doctest::Approx((22.0 + root) / 2.0).epsilon(1e-12));
    CHECK(g.p1 == doctest::Approx(1.78).epsilon(1e-2));
    CHECK(g.p2 == doctest::Approx(20.22).epsilon(1e-2));
  }
  SUBCASE("critically damped pair") {
    const EcbfGains g = EcbfGains::from_alphas(1.0, 2.0);
    CHECK(g.p1 == doctest::Approx(1.0));
    CHECK(g.p2 == doctest::Approx(1.0));
  }
  SUBCASE("complex poles rejected") {
    CHECK_THROWS_AS(EcbfGains::from_alphas(100.0, 2.0), InvalidGainsError);
    CHECK_FALSE(check_poles(100.0, 2.0).real);
  }
  SUBCASE("nonpositive pole rejected") {
    const PoleCheck c = check_poles(-4.0, 3.0);  // roots 1 and -4 -> poles -1, 4
    CHECK(c.real);
    CHECK_FALSE(c.positive);
    CHECK_THROWS_AS(EcbfGains::from_alphas(-4.0, 3.0), InvalidGainsError);
  }
  SUBCASE("vieta reconstruction over a gain grid") {
    for (double a2 = 2.0; a2 <= 40.0; a2 += 3.7) {
      for (double a1 = 0.5; a1 <= a2 * a2 / 4.0; a1 += 1.3) {
        const EcbfGains g = EcbfGains::from_alphas(a1, a2);
        CHECK(g.p1 * g.p2 == doctest::Approx(a1).epsilon(1e-9));
        CHECK(g.p1 + g.p2 == doctest::Approx(a2).epsilon(1e-9));
        CHECK(g.p1 <= g.p2);
      }
    }
  }
}

TEST_CASE("barrier value") {
  const SafetyGeometry geom = paper_geom();
  CHECK(barrier(rel_from({0.8, 0.0, 0.0}, {}), geom) == doctest::Approx(0.0));
  CHECK(barrier(rel_from({2.0, 0.0, 0.0}, {}), geom) == doctest::Approx(3.36));
  CHECK(barrier(rel_from({0.5, 0.0, 0.0}, {}), geom) == doctest::Approx(-0.39));
}

TEST_CASE("conservative relative velocity") {
  SUBCASE("zero speed maps to zero") {
    CHECK(conservative_vrel(rel_from({1.0, 0.0, 0.0}, {0.0, 0.0, 0.0})).norm() ==
          doctest::Approx(0.0));
  }
  SUBCASE("speed is redirected along -e_ij") {
    const Eigen::Vector3d v = conservative_vrel(rel_from({2.0, 0.0, 0.0}, {0.0, 3.0, 0.0}));
    CHECK(v.x() == doctest::Approx(-3.0));
    CHECK(v.y() == doctest::Approx(0.0));
    CHECK(v.z() == doctest::Approx(0.0));
  }
  SUBCASE("worst case is a fixed point") {
    const RelativeState rel = rel_from({1.5, 0.0, 0.0}, {-2.0, 0.0, 0.0});
    const Eigen::Vector3d v = conservative_vrel(rel);
    CHECK((v - rel.v_rel).norm() < 1e-12);
  }
  SUBCASE("degenerate geometry throws") {
    CHECK_THROWS_AS(conservative_vrel(rel_from({0.0, 0.0, 0.0}, {1.0, 0.0, 0.0})),
                    std::domain_error);
  }
}

TEST_CASE("barrier derivatives") {
  SUBCASE("hdot examples") {
    CHECK(barrier_dot(rel_from({1.0, 0.0, 0.0}, {0.0, 0.0, 0.0})) == doctest::Approx(0.0));
    // Appendix worst case -2 R v_rel_max.
    CHECK(barrier_dot(rel_from({3.6, 0.0, 0.0}, {0.0, 3.0, 0.0})) ==
          doctest::Approx(-2.0 * 3.6 * 3.0));
    CHECK(barrier_dot(rel_from({2.0, 0.0, 0.0}, {0.0, 3.0, 0.0})) == doctest::Approx(-12.0));
  }
  SUBCASE("hddot examples") {
    CHECK(barrier_ddot(rel_from({1.0, 0.0, 0.0}, {}), Eigen::Vector3d::Zero()) ==
          doctest::Approx(0.0));
    // Max acceleration toward the neighbor: 2 v^2 - 2 R a.
    const double r = 3.0, v = 3.0, a = 2.0;
    const RelativeState rel = rel_from({r, 0.0, 0.0}, {0.0, 0.0, v});
    CHECK(barrier_ddot(rel, Eigen::Vector3d(a, 0.0, 0.0)) ==
          doctest::Approx(2.0 * v * v - 2.0 * r * a));
    CHECK(barrier_ddot(rel, Eigen::Vector3d(-a, 0.0, 0.0)) ==
          doctest::Approx(2.0 * v * v + 2.0 * r * a));
  }
  SUBCASE("hdot is never positive") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int k = 0; k < 1000; ++k) {
      const RelativeState rel =
          rel_from({u(gen) + 4.0, u(gen), u(gen)}, {u(gen), u(gen), u(gen)});
      CHECK(barrier_dot(rel) <= 0.0);
    }
  }
  SUBCASE("conservative hdot lower-bounds the true hdot") {
    std::mt19937_64 gen(6);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int k = 0; k < 100000; ++k) {
      const RelativeState rel =
          rel_from({u(gen) + 3.5, u(gen), u(gen)}, {u(gen), u(gen), u(gen)});
      const double true_hdot = 2.0 * rel.p_rel.dot(rel.v_rel);
      CHECK(true_hdot >= barrier_dot(rel) - 1e-12);
    }
  }
  SUBCASE("hdot equals a central difference of h along the conservative flow") {
    const SafetyGeometry geom = paper_geom();
    const RelativeState rel = rel_from({2.0, 1.0, 0.3}, {0.4, -1.2, 0.8});
    const Eigen::Vector3d vt = conservative_vrel(rel);
    const double h_step = 1e-6;
    RelativeState fwd = rel, bwd = rel;
    fwd.p_rel += h_step * vt;
    bwd.p_rel -= h_step * vt;
    const double fd = (barrier(fwd, geom) - barrier(bwd, geom)) / (2.0 * h_step);
    CHECK(barrier_dot(rel) == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("ecbf constraint value") {
  const SafetyGeometry geom = paper_geom();
  const EcbfGains gains = paper_gains();

  SUBCASE("stationary pair keeps only the alpha1 h term") {
    const RelativeState rel = rel_from({2.0, 0.0, 0.0}, {0.0, 0.0, 0.0});
    CHECK(ecbf_constraint(rel, geom, gains, Eigen::Vector3d::Zero()) ==
          doctest::Approx(36.0 * 3.36));
  }
  SUBCASE("worst case vanishes at the closed-form activation radius") {
    // Root of 36 R^2 - 128 R - 5.04 located independently by bisection.
    const double root = bisect_largest_root(36.0, -128.0, -5.04, 3.0, 5.0);
    const RelativeState rel = rel_from({root, 0.0, 0.0}, {-3.0, 0.0, 0.0});
    const double g = ecbf_constraint(rel, geom, gains, Eigen::Vector3d(-2.0, 0.0, 0.0));
    CHECK(g == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(root == doctest::Approx(3.5945).epsilon(1e-3));
    // Farther activation leaves headroom.
    const RelativeState far = rel_from({5.0, 0.0, 0.0}, {-3.0, 0.0, 0.0});
    CHECK(ecbf_constraint(far, geom, gains, Eigen::Vector3d(-2.0, 0.0, 0.0)) > 0.0);
  }
  SUBCASE("affine in the ego acceleration") {
    const RelativeState rel = rel_from({1.7, -0.4, 0.2}, {0.3, 0.9, -0.2});
    const Eigen::Vector3d a1(0.4, -0.2, 1.1), a2(-0.6, 0.5, 0.3);
    const double lhs = ecbf_constraint(rel, geom, gains, a1 + a2) -
                       ecbf_constraint(rel, geom, gains, a1) -
                       ecbf_constraint(rel, geom, gains, a2) +
                       ecbf_constraint(rel, geom, gains, Eigen::Vector3d::Zero());
    CHECK(std::abs(lhs) < 1e-12);
  }
}

TEST_CASE("ecbf gradients match finite differences") {
  const SafetyGeometry geom = paper_geom();
  const EcbfGains gains = paper_gains();
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const double h = 1e-6;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Vector3d p_i(u(gen), u(gen), u(gen));
    Eigen::Vector3d p_j = p_i + Eigen::Vector3d(u(gen) + 3.0, u(gen), u(gen));
    Eigen::Vector3d v_i(u(gen), u(gen), u(gen));
    Eigen::Vector3d v_j(u(gen), u(gen), u(gen));
    Eigen::Vector3d accel(u(gen), u(gen), u(gen));

    const RelativeState rel = RelativeState::between(p_i, v_i, p_j, v_j);
    const EcbfGradients grad = ecbf_constraint_gradients(rel, geom, gains, accel);

    for (int c = 0; c < 3; ++c) {
      Eigen::Vector3d dp = Eigen::Vector3d::Zero();
      dp(c) = h;
      const double fd =
          (ecbf_constraint(RelativeState::between(p_i + dp, v_i, p_j, v_j), geom, gains, accel) -
           ecbf_constraint(RelativeState::between(p_i - dp, v_i, p_j, v_j), geom, gains, accel)) /
          (2.0 * h);
      CHECK(std::abs(grad.d_p_i(c) - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));

      const double fdv =
          (ecbf_constraint(RelativeState::between(p_i, v_i + dp, p_j, v_j), geom, gains, accel) -
           ecbf_constraint(RelativeState::between(p_i, v_i - dp, p_j, v_j), geom, gains, accel)) /
          (2.0 * h);
      CHECK(std::abs(grad.d_v_i(c) - fdv) <= 1e-5 * std::max(1.0, std::abs(fdv)));

      const double fda =
          (ecbf_constraint(rel, geom, gains, accel + dp) -
           ecbf_constraint(rel, geom, gains, accel - dp)) /
          (2.0 * h);
      CHECK(std::abs(grad.d_accel_i(c) - fda) <= 1e-5 * std::max(1.0, std::abs(fda)));
    }
  }
}

TEST_CASE("initial condition membership") {
  const SafetyGeometry geom = paper_geom();
  const EcbfGains gains = paper_gains();

  SUBCASE("stationary pair at 2 m") {
    const auto rep =
        validate_initial_conditions(rel_from({2.0, 0.0, 0.0}, {0.0, 0.0, 0.0}), geom, gains);
    CHECK(rep.nu0 == doctest::Approx(3.36));
    CHECK(rep.nu1 == doctest::Approx(gains.p1 * 3.36).epsilon(1e-12));
    CHECK(rep.nu1 == doctest::Approx(5.98).epsilon(1e-2));
    CHECK(rep.ok());
  }
  SUBCASE("boundary membership is inclusive") {
    const auto rep =
        validate_initial_conditions(rel_from({0.8, 0.0, 0.0}, {0.0, 0.0, 0.0}), geom, gains);
    CHECK(rep.nu0 == doctest::Approx(0.0));
    CHECK(rep.nu1 == doctest::Approx(0.0));
    CHECK(rep.ok());
  }
  SUBCASE("fast approach violates C1") {
    const auto rep =
        validate_initial_conditions(rel_from({2.0, 0.0, 0.0}, {3.0, 0.0, 0.0}), geom, gains);
    // hdot = -12 regardless of approach direction under the conservative model.
    CHECK(rep.nu1 == doctest::Approx(gains.p1 * 3.36 - 12.0).epsilon(1e-12));
    CHECK(rep.nu1 == doctest::Approx(-6.02).epsilon(1e-2));
    CHECK(rep.in_c0);
    CHECK_FALSE(rep.in_c1);
    CHECK_FALSE(rep.ok());
  }
}
