#include "quadswarm/min_jerk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace quadswarm {

namespace {
// s(tau) = 6 tau^5 - 15 tau^4 + 10 tau^3; peak of s' is 15/8 at tau = 1/2,
// peak of |s''| is 10/sqrt(3) at tau = 1/2 -+ sqrt(3)/6.
constexpr double kPeakSpeedFactor = 15.0 / 8.0;
const double kPeakAccelFactor = 10.0 / std::sqrt(3.0);

double quintic(double tau) { return ((6.0 * tau - 15.0) * tau + 10.0) * tau * tau * tau; }
double quintic_d1(double tau) { return ((30.0 * tau - 60.0) * tau + 30.0) * tau * tau; }
double quintic_d2(double tau) { return ((120.0 * tau - 180.0) * tau + 60.0) * tau; }
}  // namespace

MinJerkReference::MinJerkReference(const Eigen::Vector3d& p_start,
                                   const Eigen::Vector3d& p_goal, double v_max,
                                   double a_max) {
  if (!(v_max > 0.0)) throw std::invalid_argument("min jerk: v_max must be > 0");
  if (!(a_max > 0.0)) throw std::invalid_argument("min jerk: a_max must be > 0");
  p0_ = p_start;
  p1_ = p_goal;
  dir_ = p1_ - p0_;
  length_ = dir_.norm();
  if (length_ < 1e-12) {
    duration_ = 0.0;
    return;
  }
  const double t_speed = kPeakSpeedFactor * length_ / v_max;
  const double t_accel = std::sqrt(kPeakAccelFactor * length_ / a_max);
  duration_ = std::max(t_speed, t_accel);
}

double MinJerkReference::peak_speed() const {
  if (duration_ <= 0.0) return 0.0;
  return kPeakSpeedFactor * length_ / duration_;
}

Eigen::Vector3d MinJerkReference::position(double t) const {
  if (duration_ <= 0.0) return p1_;
  const double tau = std::clamp(t / duration_, 0.0, 1.0);
  return p0_ + quintic(tau) * dir_;
}

Eigen::Vector3d MinJerkReference::velocity(double t) const {
  if (duration_ <= 0.0 || t < 0.0 || t > duration_) return Eigen::Vector3d::Zero();
  return (quintic_d1(t / duration_) / duration_) * dir_;
}

Eigen::Vector3d MinJerkReference::acceleration(double t) const {
  if (duration_ <= 0.0 || t < 0.0 || t > duration_) return Eigen::Vector3d::Zero();
  return (quintic_d2(t / duration_) / (duration_ * duration_)) * dir_;
}

QuadState MinJerkReference::state(double t) const {
  QuadState s;
  s.p = position(t);
  s.v = velocity(t);
  return s;
}

MotorCommand hover_command(const QuadParams& params) {
  return MotorCommand(Eigen::Vector4d::Constant(params.hover_thrust_per_rotor()));
}

}  // namespace quadswarm
