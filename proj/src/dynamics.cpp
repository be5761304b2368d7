#include "quadswarm/dynamics.hpp"

#include <cmath>

namespace quadswarm {

namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& a) {
  Eigen::Matrix3d m;
  m << 0, -a.z(), a.y(), a.z(), 0, -a.x(), -a.y(), a.x(), 0;
  return m;
}

// Third column of R(q) for an unnormalized quaternion (w,x,y,z); the thrust axis.
Eigen::Vector3d body_z_axis(const Eigen::Quaterniond& q) {
  return {2.0 * (q.x() * q.z() + q.y() * q.w()),
          2.0 * (q.y() * q.z() - q.x() * q.w()),
          1.0 - 2.0 * (q.x() * q.x() + q.y() * q.y())};
}

// d(body_z_axis)/dq, columns ordered (w, x, y, z).
Eigen::Matrix<double, 3, 4> body_z_axis_jacobian(const Eigen::Quaterniond& q) {
  Eigen::Matrix<double, 3, 4> j;
  j.col(0) << 2.0 * q.y(), -2.0 * q.x(), 0.0;
  j.col(1) << 2.0 * q.z(), -2.0 * q.w(), -4.0 * q.x();
  j.col(2) << 2.0 * q.w(), 2.0 * q.z(), -4.0 * q.y();
  j.col(3) << 2.0 * q.x(), 2.0 * q.y(), 0.0;
  return j;
}

}  // namespace

Eigen::Matrix<double, 3, 4> mixer_matrix(const QuadParams& params) {
  // X layout: rotors at 45 degrees, diagonal distance arm_length, numbered
  // counterclockwise from front-left; spin directions alternate (+,-,+,-).
  const double a = params.arm_length / std::sqrt(2.0);
  const double k = params.torque_coeff;
  Eigen::Matrix<double, 3, 4> mix;
  mix << a, a, -a, -a,
        -a, a, a, -a,
         k, -k, k, -k;
  return mix;
}

QuadState::Vector derivative(const QuadState& state, const MotorCommand& cmd,
                             const QuadParams& params) {
  if (!state.finite()) throw std::invalid_argument("dynamics: non-finite state");
  if (!cmd.finite()) throw std::invalid_argument("dynamics: non-finite motor command");

  const double thrust = cmd.total();
  const Eigen::Vector3d accel =
      (thrust / params.mass) * body_z_axis(state.q) -
      Eigen::Vector3d(0, 0, params.gravity);

  // qdot = 0.5 q (x) (0, w)
  const Eigen::Quaterniond& q = state.q;
  const Eigen::Vector3d& w = state.w;
  Eigen::Vector4d qdot;
  qdot(0) = -0.5 * (q.x() * w.x() + q.y() * w.y() + q.z() * w.z());
  qdot(1) = 0.5 * (q.w() * w.x() + q.y() * w.z() - q.z() * w.y());
  qdot(2) = 0.5 * (q.w() * w.y() - q.x() * w.z() + q.z() * w.x());
  qdot(3) = 0.5 * (q.w() * w.z() + q.x() * w.y() - q.y() * w.x());

  const Eigen::Vector3d torque = mixer_matrix(params) * cmd.u;
  const Eigen::Vector3d inertia = params.inertia_diag;
  const Eigen::Vector3d wdot =
      (torque - w.cross(inertia.asDiagonal() * w)).cwiseQuotient(inertia);

  QuadState::Vector dx;
  dx.segment<3>(0) = state.v;
  dx.segment<3>(3) = accel;
  dx.segment<4>(6) = qdot;
  dx.segment<3>(10) = wdot;
  return dx;
}

DynamicsJacobians derivative_jacobians(const QuadState& state, const MotorCommand& cmd,
                                       const QuadParams& params) {
  DynamicsJacobians jac;
  jac.A.setZero();
  jac.B.setZero();

  const Eigen::Quaterniond& q = state.q;
  const Eigen::Vector3d& w = state.w;

  // p rows
  jac.A.block<3, 3>(0, 3).setIdentity();

  // v rows: accel = (sum u / m) R(q) e3 - g e3
  const double thrust = cmd.total();
  jac.A.block<3, 4>(3, 6) = (thrust / params.mass) * body_z_axis_jacobian(q);
  const Eigen::Vector3d axis_over_m = body_z_axis(q) / params.mass;
  for (int k = 0; k < 4; ++k) jac.B.block<3, 1>(3, k) = axis_over_m;

  // q rows
  Eigen::Matrix4d dq_dq;
  dq_dq << 0, -w.x(), -w.y(), -w.z(),
           w.x(), 0, w.z(), -w.y(),
           w.y(), -w.z(), 0, w.x(),
           w.z(), w.y(), -w.x(), 0;
  jac.A.block<4, 4>(6, 6) = 0.5 * dq_dq;
  Eigen::Matrix<double, 4, 3> dq_dw;
  dq_dw << -q.x(), -q.y(), -q.z(),
            q.w(), -q.z(), q.y(),
            q.z(), q.w(), -q.x(),
           -q.y(), q.x(), q.w();
  jac.A.block<4, 3>(6, 10) = 0.5 * dq_dw;

  // w rows: wdot = J^-1 (tau - w x Jw)
  const Eigen::Vector3d inertia = params.inertia_diag;
  const Eigen::Matrix3d j_inv = inertia.cwiseInverse().asDiagonal();
  const Eigen::Matrix3d gyro =
      skew(inertia.asDiagonal() * w) - skew(w) * Eigen::Matrix3d(inertia.asDiagonal());
  jac.A.block<3, 3>(10, 10) = j_inv * gyro;
  jac.B.block<3, 4>(10, 0) = j_inv * mixer_matrix(params);

  return jac;
}

QuadState step_rk4(const QuadState& state, const MotorCommand& cmd,
                   const QuadParams& params, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_rk4: dt must be > 0");
  const QuadState::Vector x0 = state.to_vector();
  const QuadState::Vector k1 = derivative(state, cmd, params);
  const QuadState::Vector k2 =
      derivative(QuadState::from_vector(x0 + 0.5 * dt * k1), cmd, params);
  const QuadState::Vector k3 =
      derivative(QuadState::from_vector(x0 + 0.5 * dt * k2), cmd, params);
  const QuadState::Vector k4 =
      derivative(QuadState::from_vector(x0 + dt * k3), cmd, params);
  QuadState next =
      QuadState::from_vector(x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  next.renormalize();
  return next;
}

StepJacobians step_rk4_jacobians(const QuadState& state, const MotorCommand& cmd,
                                 const QuadParams& params, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_rk4: dt must be > 0");
  using Mat = Eigen::Matrix<double, QuadState::kDim, QuadState::kDim>;
  using MatB = Eigen::Matrix<double, QuadState::kDim, 4>;

  const QuadState::Vector x0 = state.to_vector();

  QuadState::Vector k[4];
  Mat ka[4];
  MatB kb[4];
  const double stage_scale[4] = {0.0, 0.5, 0.5, 1.0};
  QuadState::Vector xs = x0;
  Mat xs_a = Mat::Identity();
  MatB xs_b = MatB::Zero();
  for (int s = 0; s < 4; ++s) {
    if (s > 0) {
      xs = x0 + stage_scale[s] * dt * k[s - 1];
      xs_a = Mat::Identity() + stage_scale[s] * dt * ka[s - 1];
      xs_b = stage_scale[s] * dt * kb[s - 1];
    }
    const QuadState stage_state = QuadState::from_vector(xs);
    k[s] = derivative(stage_state, cmd, params);
    const DynamicsJacobians jac = derivative_jacobians(stage_state, cmd, params);
    ka[s] = jac.A * xs_a;
    kb[s] = jac.A * xs_b + jac.B;
  }

  const QuadState::Vector x_raw =
      x0 + (dt / 6.0) * (k[0] + 2.0 * k[1] + 2.0 * k[2] + k[3]);
  Mat a = Mat::Identity() + (dt / 6.0) * (ka[0] + 2.0 * ka[1] + 2.0 * ka[2] + ka[3]);
  MatB b = (dt / 6.0) * (kb[0] + 2.0 * kb[1] + 2.0 * kb[2] + kb[3]);

  // Renormalization acts on the quaternion block: y -> y/|y|.
  const Eigen::Vector4d y = x_raw.segment<4>(6);
  const double norm = y.norm();
  const Eigen::Vector4d yn = y / norm;
  const Eigen::Matrix4d proj =
      (Eigen::Matrix4d::Identity() - yn * yn.transpose()) / norm;
  a.block<4, QuadState::kDim>(6, 0) = proj * a.block<4, QuadState::kDim>(6, 0);
  b.block<4, 4>(6, 0) = proj * b.block<4, 4>(6, 0);

  StepJacobians out;
  QuadState::Vector x_next = x_raw;
  x_next.segment<4>(6) = yn;
  out.next = QuadState::from_vector(x_next);
  out.A = a;
  out.B = b;
  return out;
}

Eigen::Vector3d translational_accel(const QuadState& state, const MotorCommand& cmd,
                                    const QuadParams& params) {
  return (cmd.total() / params.mass) * body_z_axis(state.q) -
         Eigen::Vector3d(0, 0, params.gravity);
}

AccelBound max_translational_accel(const QuadParams& params) {
  AccelBound out;
  out.certified = params.a_max;
  out.physics_limit = 4.0 * params.u_max / params.mass - params.gravity;
  out.consistent = out.certified <= out.physics_limit;
  return out;
}

}  // namespace quadswarm
