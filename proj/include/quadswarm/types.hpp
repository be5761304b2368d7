#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace quadswarm {

/// Exit-code-bearing error categories surfaced by the CLI.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidGainsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Full rigid-body state of one vehicle. Quaternion is body-to-inertial,
/// stored (w, x, y, z) when flattened.
struct QuadState {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();   // m, inertial
  Eigen::Vector3d v = Eigen::Vector3d::Zero();   // m/s, inertial
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();  // body -> inertial
  Eigen::Vector3d w = Eigen::Vector3d::Zero();   // rad/s, body

  static constexpr int kDim = 13;
  using Vector = Eigen::Matrix<double, kDim, 1>;

  Vector to_vector() const {
    Vector x;
    x.segment<3>(0) = p;
    x.segment<3>(3) = v;
    x(6) = q.w();
    x(7) = q.x();
    x(8) = q.y();
    x(9) = q.z();
    x.segment<3>(10) = w;
    return x;
  }

  static QuadState from_vector(const Vector& x) {
    QuadState s;
    s.p = x.segment<3>(0);
    s.v = x.segment<3>(3);
    s.q = Eigen::Quaterniond(x(6), x(7), x(8), x(9));
    s.w = x.segment<3>(10);
    return s;
  }

  bool finite() const { return to_vector().allFinite(); }

  void renormalize() { q.normalize(); }
};

/// Four per-rotor thrusts in newtons; the control decision variables.
struct MotorCommand {
  Eigen::Vector4d u = Eigen::Vector4d::Zero();

  MotorCommand() = default;
  explicit MotorCommand(const Eigen::Vector4d& thrusts) : u(thrusts) {}

  double total() const { return u.sum(); }
  bool finite() const { return u.allFinite(); }
  bool within_limits(double u_min, double u_max, double tol = 0.0) const {
    return (u.array() >= u_min - tol).all() && (u.array() <= u_max + tol).all();
  }
};

/// Physical parameters of a vehicle plus the certified envelope values
/// (v_max, a_max, collision radius) the safety analysis consumes.
struct QuadParams {
  double mass = 1.0;                                    // kg
  Eigen::Vector3d inertia_diag{0.005, 0.005, 0.009};    // kg m^2
  double arm_length = 0.17;                             // m
  double torque_coeff = 0.016;                          // m (drag torque / thrust)
  double u_min = 0.0;                                   // N per rotor
  double u_max = 6.0;                                   // N per rotor
  double v_max = 1.5;                                   // m/s speed cap
  double a_max = 2.0;                                   // m/s^2 certified accel bound
  double radius = 0.2;                                  // m collision radius
  double gravity = 9.81;                                // m/s^2

  double hover_thrust_per_rotor() const { return mass * gravity / 4.0; }

  void validate() const {
    if (!(mass > 0.0)) throw ConfigError("quad params: mass must be > 0");
    if (!(inertia_diag.array() > 0.0).all())
      throw ConfigError("quad params: inertia must be componentwise > 0");
    if (!(u_min >= 0.0) || !(u_min < u_max))
      throw ConfigError("quad params: need 0 <= u_min < u_max");
    if (!(arm_length > 0.0)) throw ConfigError("quad params: arm_length must be > 0");
    if (!(v_max > 0.0)) throw ConfigError("quad params: v_max must be > 0");
    if (!(a_max > 0.0)) throw ConfigError("quad params: a_max must be > 0");
    if (!(radius >= 0.0)) throw ConfigError("quad params: radius must be >= 0");
  }
};

}  // namespace quadswarm
