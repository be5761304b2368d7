#pragma once

#include "quadswarm/types.hpp"

#include <string>

namespace quadswarm {

/// Pole pair of the second-order barrier dynamics. A gains pair (alpha1,
/// alpha2) is valid when lambda^2 + alpha2 lambda + alpha1 has two real
/// negative roots; p1 <= p2 are the negated roots.
struct PoleCheck {
  bool real = false;
  bool positive = false;
  double p1 = 0.0;
  double p2 = 0.0;
  std::string message;
  bool ok() const { return real && positive; }
};

PoleCheck check_poles(double alpha1, double alpha2);

/// Validated barrier gains. Constructed through from_alphas(), so p1*p2 ==
/// alpha1 and p1+p2 == alpha2 hold by construction.
struct EcbfGains {
  double alpha1 = 0.0;  // 1/s^2
  double alpha2 = 0.0;  // 1/s
  double p1 = 0.0;      // 1/s, smaller pole
  double p2 = 0.0;      // 1/s, larger pole

  /// Throws InvalidGainsError when the poles are complex or nonpositive.
  static EcbfGains from_alphas(double alpha1, double alpha2);
};

/// Pairwise safety geometry: enforced margin plus the two radial dimensions.
struct SafetyGeometry {
  double margin = 0.0;  // d_s (agent-agent) or d_so (agent-obstacle), m
  double r_i = 0.0;     // m
  double r_j = 0.0;     // m

  double combined() const { return margin + r_i + r_j; }

  void validate() const {
    if (margin < 0.0 || r_i < 0.0 || r_j < 0.0)
      throw ConfigError("safety geometry: negative entry");
    if (!(combined() > 0.0))
      throw ConfigError("safety geometry: combined distance must be > 0");
  }
};

/// Relative kinematics of a pair, seen from the ego vehicle i.
struct RelativeState {
  Eigen::Vector3d p_rel = Eigen::Vector3d::Zero();  // p_j - p_i, m
  Eigen::Vector3d v_rel = Eigen::Vector3d::Zero();  // v_j - v_i, m/s

  static RelativeState between(const Eigen::Vector3d& p_i, const Eigen::Vector3d& v_i,
                               const Eigen::Vector3d& p_j, const Eigen::Vector3d& v_j) {
    return {p_j - p_i, v_j - v_i};
  }

  double distance() const { return p_rel.norm(); }

  /// Unit vector from i toward j. Throws on degenerate geometry.
  Eigen::Vector3d unit() const;
};

/// h = |p_rel|^2 - (margin + r_i + r_j)^2. Safe set is h >= 0.
double barrier(const RelativeState& rel, const SafetyGeometry& geom);

/// Worst-case relative velocity: the measured speed redirected toward the
/// ego vehicle, -|v_rel| e_ij. Throws on zero separation.
Eigen::Vector3d conservative_vrel(const RelativeState& rel);

/// hdot under the conservative velocity: -2 |p_rel| |v_rel|, never positive.
double barrier_dot(const RelativeState& rel);

/// hddot = 2 |v_rel|^2 - 2 p_rel . accel_i (neighbor assumed unaccelerated).
double barrier_ddot(const RelativeState& rel, const Eigen::Vector3d& accel_i);

/// G = hddot + alpha2 hdot + alpha1 h; the constraint enforced is G >= 0.
double ecbf_constraint(const RelativeState& rel, const SafetyGeometry& geom,
                       const EcbfGains& gains, const Eigen::Vector3d& accel_i);

/// Partial derivatives of G with respect to the ego position, velocity and
/// acceleration. The acceleration-to-input chain is the caller's business.
struct EcbfGradients {
  double value = 0.0;
  Eigen::Vector3d d_p_i = Eigen::Vector3d::Zero();
  Eigen::Vector3d d_v_i = Eigen::Vector3d::Zero();
  Eigen::Vector3d d_accel_i = Eigen::Vector3d::Zero();
};

EcbfGradients ecbf_constraint_gradients(const RelativeState& rel,
                                        const SafetyGeometry& geom,
                                        const EcbfGains& gains,
                                        const Eigen::Vector3d& accel_i);

/// Theorem-1 initial-condition membership: nu0 = h and nu1 = hdot + p1 h,
/// with hdot taken under the conservative velocity model.
struct InitialConditionReport {
  double nu0 = 0.0;
  double nu1 = 0.0;
  bool in_c0 = false;
  bool in_c1 = false;
  bool ok() const { return in_c0 && in_c1; }
};

InitialConditionReport validate_initial_conditions(const RelativeState& rel,
                                                   const SafetyGeometry& geom,
                                                   const EcbfGains& gains);

}  // namespace quadswarm
