#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "quadswarm/dynamics.hpp"

#include <random>

using namespace quadswarm;

namespace {

QuadParams paper_params() { return QuadParams{}; }

QuadState random_state(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  QuadState s;
  s.p = Eigen::Vector3d(8.0 * u(gen), 8.0 * u(gen), 1.0 + u(gen));
  s.v = Eigen::Vector3d(u(gen), u(gen), u(gen));
  Eigen::Vector4d q(1.0 + 0.3 * u(gen), 0.3 * u(gen), 0.3 * u(gen), 0.3 * u(gen));
  q.normalize();
  s.q = Eigen::Quaterniond(q(0), q(1), q(2), q(3));
  s.w = Eigen::Vector3d(u(gen), u(gen), u(gen));
  return s;
}

MotorCommand random_command(std::mt19937_64& gen, const QuadParams& p) {
  std::uniform_real_distribution<double> u(p.u_min, p.u_max);
  return MotorCommand(Eigen::Vector4d(u(gen), u(gen), u(gen), u(gen)));
}

}  // namespace

TEST_CASE("hover command is an equilibrium") {
  const QuadParams p = paper_params();
  QuadState s;
  const MotorCommand cmd(Eigen::Vector4d::Constant(p.mass * p.gravity / 4.0));
  const QuadState::Vector dx = derivative(s, cmd, p);
  CHECK(dx.segment<3>(3).norm() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(dx.segment<3>(10).norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("free fall accelerates at -g") {
  const QuadParams p = paper_params();
  QuadState s;
  const QuadState::Vector dx = derivative(s, MotorCommand{}, p);
  CHECK(dx(3) == doctest::Approx(0.0));
  CHECK(dx(4) == doctest::Approx(0.0));
  CHECK(dx(5) == doctest::Approx(-9.81));
}

TEST_CASE("asymmetric thrust produces the 45-degree-arm torque") {
  const QuadParams p = paper_params();
  const double u0 = p.mass * p.gravity / 4.0;
  const double delta = 0.5;
  const Eigen::Vector4d u(u0 + delta, u0, u0 - delta, u0);
  const Eigen::Vector3d tau = mixer_matrix(p) * u;
  const double expected = p.arm_length * delta * std::sqrt(2.0);
  CHECK(std::abs(tau.x()) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::abs(tau.y()) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(tau.z() == doctest::Approx(0.0));
}

TEST_CASE("derivative is affine in the input") {
  const QuadParams p = paper_params();
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 20; ++trial) {
    const QuadState s = random_state(gen);
    const MotorCommand u1 = random_command(gen, p);
    const MotorCommand u2 = random_command(gen, p);
    MotorCommand u12;
    u12.u = u1.u + u2.u;
    const QuadState::Vector lhs = derivative(s, u12, p) - derivative(s, u1, p) -
                                  derivative(s, u2, p) + derivative(s, MotorCommand{}, p);
    CHECK(lhs.lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("rk4 hover step leaves the state in place") {
  const QuadParams p = paper_params();
  QuadState s;
  s.p = Eigen::Vector3d(1.0, 2.0, 1.5);
  const MotorCommand cmd(Eigen::Vector4d::Constant(p.mass * p.gravity / 4.0));
  for (double dt : {0.01, 0.05, 0.1}) {
    const QuadState next = step_rk4(s, cmd, p, dt);
    CHECK((next.p - s.p).norm() < 1e-9);
    CHECK(next.v.norm() < 1e-9);
  }
}

TEST_CASE("ballistic drop matches the closed form") {
  const QuadParams p = paper_params();
  QuadState s;
  s.p = Eigen::Vector3d(0.0, 0.0, 5.0);
  const QuadState next = step_rk4(s, MotorCommand{}, p, 0.1);
  CHECK(next.p.z() - s.p.z() == doctest::Approx(-0.5 * 9.81 * 0.01).epsilon(1e-6));
}

TEST_CASE("rk4 shows at least fourth-order step halving ratios") {
  const QuadParams p = paper_params();
  std::mt19937_64 gen(42);
  QuadState s = random_state(gen);
  s.w = Eigen::Vector3d(1.0, -2.0, 3.0);
  const MotorCommand cmd(Eigen::Vector4d(3.0, 2.0, 2.5, 1.5));

  const auto halving_gap = [&](double dt) {
    const QuadState full = step_rk4(s, cmd, p, dt);
    const QuadState half = step_rk4(step_rk4(s, cmd, p, dt / 2.0), cmd, p, dt / 2.0);
    return (full.to_vector() - half.to_vector()).norm();
  };

  const double g1 = halving_gap(0.1);
  const double g2 = halving_gap(0.05);
  const double g3 = halving_gap(0.025);
  REQUIRE(g1 > 1e-13);  // above roundoff so the ratios mean something
  CHECK(g1 / g2 > 16.0);
  CHECK(g2 / g3 > 16.0);
}

TEST_CASE("translational energy is conserved in free fall") {
  const QuadParams p = paper_params();
  QuadState s;
  s.p = Eigen::Vector3d(0.0, 0.0, 100.0);
  s.v = Eigen::Vector3d(1.0, -0.5, 2.0);
  const auto energy = [&](const QuadState& x) {
    return 0.5 * x.v.squaredNorm() + p.gravity * x.p.z();
  };
  const double e0 = energy(s);
  QuadState x = s;
  for (int k = 0; k < 100; ++k) x = step_rk4(x, MotorCommand{}, p, 0.01);
  CHECK(std::abs(energy(x) - e0) < 1e-9 * std::max(1.0, std::abs(e0)));
}

TEST_CASE("quaternion norm stays unit through aggressive maneuvers") {
  const QuadParams p = paper_params();
  std::mt19937_64 gen(3);
  QuadState s = random_state(gen);
  const MotorCommand cmd(Eigen::Vector4d(4.0, 1.0, 3.0, 2.0));
  for (int k = 0; k < 200; ++k) {
    s = step_rk4(s, cmd, p, 0.05);
    CHECK(std::abs(s.q.norm() - 1.0) < 1e-9);
  }
}

TEST_CASE("analytic continuous jacobians match central differences") {
  const QuadParams p = paper_params();
  std::mt19937_64 gen(11);
  const double h = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    const QuadState s = random_state(gen);
    const MotorCommand cmd = random_command(gen, p);
    const DynamicsJacobians jac = derivative_jacobians(s, cmd, p);

    for (int col = 0; col < QuadState::kDim; ++col) {
      QuadState::Vector xp = s.to_vector();
      QuadState::Vector xm = s.to_vector();
      xp(col) += h;
      xm(col) -= h;
      const QuadState::Vector fd =
          (derivative(QuadState::from_vector(xp), cmd, p) -
           derivative(QuadState::from_vector(xm), cmd, p)) /
          (2.0 * h);
      for (int r = 0; r < QuadState::kDim; ++r)
        CHECK(std::abs(jac.A(r, col) - fd(r)) <=
              1e-5 * std::max(1.0, std::abs(jac.A(r, col))));
    }
    for (int col = 0; col < 4; ++col) {
      MotorCommand up = cmd, um = cmd;
      up.u(col) += h;
      um.u(col) -= h;
      const QuadState::Vector fd = (derivative(s, up, p) - derivative(s, um, p)) / (2.0 * h);
      for (int r = 0; r < QuadState::kDim; ++r)
        CHECK(std::abs(jac.B(r, col) - fd(r)) <=
              1e-5 * std::max(1.0, std::abs(jac.B(r, col))));
    }
  }
}

TEST_CASE("discrete step jacobians match central differences") {
  const QuadParams p = paper_params();
  std::mt19937_64 gen(17);
  const double h = 1e-6;
  const double dt = 0.1;
  for (int trial = 0; trial < 5; ++trial) {
    const QuadState s = random_state(gen);
    const MotorCommand cmd = random_command(gen, p);
    const StepJacobians sj = step_rk4_jacobians(s, cmd, p, dt);
    CHECK((sj.next.to_vector() - step_rk4(s, cmd, p, dt).to_vector()).norm() < 1e-12);

    for (int col = 0; col < QuadState::kDim; ++col) {
      QuadState::Vector xp = s.to_vector();
      QuadState::Vector xm = s.to_vector();
      xp(col) += h;
      xm(col) -= h;
      const QuadState::Vector fd =
          (step_rk4(QuadState::from_vector(xp), cmd, p, dt).to_vector() -
           step_rk4(QuadState::from_vector(xm), cmd, p, dt).to_vector()) /
          (2.0 * h);
      for (int r = 0; r < QuadState::kDim; ++r)
        CHECK(std::abs(sj.A(r, col) - fd(r)) <=
              1e-5 * std::max(1.0, std::abs(sj.A(r, col))));
    }
    for (int col = 0; col < 4; ++col) {
      MotorCommand up = cmd, um = cmd;
      up.u(col) += h;
      um.u(col) -= h;
      const QuadState::Vector fd = (step_rk4(s, up, p, dt).to_vector() -
                                    step_rk4(s, um, p, dt).to_vector()) /
                                   (2.0 * h);
      for (int r = 0; r < QuadState::kDim; ++r)
        CHECK(std::abs(sj.B(r, col) - fd(r)) <=
              1e-5 * std::max(1.0, std::abs(sj.B(r, col))));
    }
  }
}

TEST_CASE("non-finite inputs are rejected with a diagnostic") {
  const QuadParams p = paper_params();
  QuadState s;
  s.v.x() = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(derivative(s, MotorCommand{}, p), std::invalid_argument);
  QuadState ok;
  MotorCommand bad;
  bad.u(2) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(derivative(ok, bad, p), std::invalid_argument);
  CHECK_THROWS_AS(step_rk4(ok, MotorCommand{}, p, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(step_rk4(ok, MotorCommand{}, p, -0.1), std::invalid_argument);
}

TEST_CASE("acceleration envelope checks") {
  QuadParams p = paper_params();
  SUBCASE("paper hardware value") {
    const AccelBound b = max_translational_accel(p);
    CHECK(b.certified == doctest::Approx(2.0));
    CHECK(b.consistent);
  }
  SUBCASE("two-times-hover thrust gives a_max = g") {
    p.u_max = p.mass * p.gravity / 2.0;
    p.a_max = 1.0;
    const AccelBound b = max_translational_accel(p);
    CHECK(b.physics_limit == doctest::Approx(p.gravity));
  }
  SUBCASE("inconsistent configuration is flagged") {
    p.u_max = (3.0 + p.gravity) * p.mass / 4.0;  // physics limit 3 m/s^2
    p.a_max = 5.0;
    const AccelBound b = max_translational_accel(p);
    CHECK(b.physics_limit == doctest::Approx(3.0));
    CHECK_FALSE(b.consistent);
  }
}
