#pragma once

#include "quadswarm/types.hpp"

namespace quadswarm {

/// Continuous-time Jacobians of the rigid-body model, d(xdot)/dx and
/// d(xdot)/du, in the (p, v, q, w) flattening order.
struct DynamicsJacobians {
  Eigen::Matrix<double, QuadState::kDim, QuadState::kDim> A;
  Eigen::Matrix<double, QuadState::kDim, 4> B;
};

/// Discrete one-step map Jacobians (RK4 plus quaternion renormalization).
struct StepJacobians {
  QuadState next;
  Eigen::Matrix<double, QuadState::kDim, QuadState::kDim> A;
  Eigen::Matrix<double, QuadState::kDim, 4> B;
};

/// Result of the translational-acceleration envelope check.
struct AccelBound {
  double certified;      // the configured a_max used by the range analysis
  double physics_limit;  // 4 u_max / m - g
  bool consistent;       // certified <= physics_limit
};

/// Per-rotor thrust to body torque map for the 45-degree X layout.
Eigen::Matrix<double, 3, 4> mixer_matrix(const QuadParams& params);

/// Control-affine rigid-body derivative. Throws on non-finite input.
QuadState::Vector derivative(const QuadState& state, const MotorCommand& cmd,
                             const QuadParams& params);

/// Analytic Jacobians of derivative() at (state, cmd).
DynamicsJacobians derivative_jacobians(const QuadState& state, const MotorCommand& cmd,
                                       const QuadParams& params);

/// Classical RK4 step; quaternion renormalized afterwards. Requires dt > 0.
QuadState step_rk4(const QuadState& state, const MotorCommand& cmd,
                   const QuadParams& params, double dt);

/// RK4 step together with its analytic sensitivities, renormalization included.
StepJacobians step_rk4_jacobians(const QuadState& state, const MotorCommand& cmd,
                                 const QuadParams& params, double dt);

/// World-frame acceleration produced by (state, cmd): thrust along body z minus gravity.
Eigen::Vector3d translational_accel(const QuadState& state, const MotorCommand& cmd,
                                    const QuadParams& params);

/// Certified accel bound plus the thrust-derived limit and a consistency flag.
AccelBound max_translational_accel(const QuadParams& params);

}  // namespace quadswarm
