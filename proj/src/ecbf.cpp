#include "quadswarm/ecbf.hpp"

#include <cmath>

namespace quadswarm {

namespace {
constexpr double kDegenerateDistance = 1e-12;
constexpr double kZeroSpeed = 1e-12;
}  // namespace

PoleCheck check_poles(double alpha1, double alpha2) {
  PoleCheck out;
  const double disc = alpha2 * alpha2 - 4.0 * alpha1;
  if (disc < 0.0) {
    out.message = "complex poles: alpha2^2 < 4 alpha1";
    return out;
  }
  out.real = true;
  // Roots of lambda^2 + alpha2 lambda + alpha1 are negated to the pole
  // magnitudes required positive.
  const double root = std::sqrt(disc);
  out.p1 = (alpha2 - root) / 2.0;
  out.p2 = (alpha2 + root) / 2.0;
  out.positive = out.p1 > 0.0 && out.p2 > 0.0;
  if (!out.positive) out.message = "nonpositive pole";
  return out;
}

EcbfGains EcbfGains::from_alphas(double alpha1, double alpha2) {
  const PoleCheck check = check_poles(alpha1, alpha2);
  if (!check.ok())
    throw InvalidGainsError("invalid ECBF gains (" + std::to_string(alpha1) + ", " +
                            std::to_string(alpha2) + "): " + check.message);
  EcbfGains g;
  g.alpha1 = alpha1;
  g.alpha2 = alpha2;
  g.p1 = check.p1;
  g.p2 = check.p2;
  return g;
}

Eigen::Vector3d RelativeState::unit() const {
  const double n = p_rel.norm();
  if (n < kDegenerateDistance)
    throw std::domain_error("relative state: zero separation, direction undefined");
  return p_rel / n;
}

double barrier(const RelativeState& rel, const SafetyGeometry& geom) {
  const double d = geom.combined();
  return rel.p_rel.squaredNorm() - d * d;
}

Eigen::Vector3d conservative_vrel(const RelativeState& rel) {
  return -rel.v_rel.norm() * rel.unit();
}

double barrier_dot(const RelativeState& rel) {
  // 2 p_rel . vtilde with vtilde = -|v_rel| e_ij collapses to the closed form.
  return -2.0 * rel.p_rel.norm() * rel.v_rel.norm();
}

double barrier_ddot(const RelativeState& rel, const Eigen::Vector3d& accel_i) {
  return 2.0 * rel.v_rel.squaredNorm() - 2.0 * rel.p_rel.dot(accel_i);
}

double ecbf_constraint(const RelativeState& rel, const SafetyGeometry& geom,
                       const EcbfGains& gains, const Eigen::Vector3d& accel_i) {
  return barrier_ddot(rel, accel_i) + gains.alpha2 * barrier_dot(rel) +
         gains.alpha1 * barrier(rel, geom);
}

EcbfGradients ecbf_constraint_gradients(const RelativeState& rel,
                                        const SafetyGeometry& geom,
                                        const EcbfGains& gains,
                                        const Eigen::Vector3d& accel_i) {
  EcbfGradients out;
  out.value = ecbf_constraint(rel, geom, gains, accel_i);

  const double dist = rel.p_rel.norm();
  const double speed = rel.v_rel.norm();
  const Eigen::Vector3d e = rel.p_rel / std::max(dist, kDegenerateDistance);
  const Eigen::Vector3d v_hat =
      speed > kZeroSpeed ? Eigen::Vector3d(rel.v_rel / speed) : Eigen::Vector3d::Zero();

  // d/dp_i: h term -2 a1 p_rel, hdot term +2 a2 s e, hddot term +2 accel.
  out.d_p_i = -2.0 * gains.alpha1 * rel.p_rel + 2.0 * gains.alpha2 * speed * e +
              2.0 * accel_i;
  // d/dv_i: hdot term +2 a2 n vhat, hddot term -4 v_rel.
  out.d_v_i = 2.0 * gains.alpha2 * dist * v_hat - 4.0 * rel.v_rel;
  out.d_accel_i = -2.0 * rel.p_rel;
  return out;
}

InitialConditionReport validate_initial_conditions(const RelativeState& rel,
                                                   const SafetyGeometry& geom,
                                                   const EcbfGains& gains) {
  InitialConditionReport out;
  out.nu0 = barrier(rel, geom);
  out.nu1 = barrier_dot(rel) + gains.p1 * out.nu0;
  out.in_c0 = out.nu0 >= 0.0;
  out.in_c1 = out.nu1 >= 0.0;
  return out;
}

}  // namespace quadswarm
