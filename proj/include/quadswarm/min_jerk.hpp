#pragma once

#include "quadswarm/types.hpp"

namespace quadswarm {

/// Straight-line minimum-jerk (quintic) segment with zero boundary velocity
/// and acceleration. Duration is set so the peak speed is v_max, stretched
/// further when the quintic's peak acceleration would exceed a_max.
class MinJerkReference {
 public:
  MinJerkReference() = default;
  MinJerkReference(const Eigen::Vector3d& p_start, const Eigen::Vector3d& p_goal,
                   double v_max, double a_max);

  double duration() const { return duration_; }
  double peak_speed() const;

  /// Sampled profile; times are clamped to [0, duration].
  Eigen::Vector3d position(double t) const;
  Eigen::Vector3d velocity(double t) const;
  Eigen::Vector3d acceleration(double t) const;

  const Eigen::Vector3d& start() const { return p0_; }
  const Eigen::Vector3d& goal() const { return p1_; }

  /// Full reference state: quintic translation, level attitude, zero rate.
  QuadState state(double t) const;

 private:
  Eigen::Vector3d p0_ = Eigen::Vector3d::Zero();
  Eigen::Vector3d p1_ = Eigen::Vector3d::Zero();
  Eigen::Vector3d dir_ = Eigen::Vector3d::Zero();  // p1 - p0
  double length_ = 0.0;
  double duration_ = 0.0;
};

/// Reference input: thrust balancing gravity, split across the four rotors.
MotorCommand hover_command(const QuadParams& params);

}  // namespace quadswarm
