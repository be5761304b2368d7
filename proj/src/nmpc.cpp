#include "quadswarm/nmpc.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace quadswarm {

namespace {
constexpr int kNX = QuadState::kDim;
constexpr int kNU = 4;
constexpr double kDegenerateDistance = 1e-9;
}  // namespace

NmpcSolver::NmpcSolver(const QuadParams& params, const OcpConfig& cfg,
                       const EcbfGains& gains, double d_s, double d_so)
    : params_(params), cfg_(cfg), gains_(gains), d_s_(d_s), d_so_(d_so) {
  params_.validate();
  cfg_.validate();
}

SafetyGeometry NmpcSolver::pair_geometry(const NeighborSnapshot& nb) const {
  SafetyGeometry geom;
  geom.margin = nb.kind == NeighborSnapshot::Kind::agent ? d_s_ : d_so_;
  geom.r_i = params_.radius;
  geom.r_j = nb.radius;
  return geom;
}

std::vector<QuadState> NmpcSolver::rollout(
    const QuadState& x0, const std::vector<MotorCommand>& inputs) const {
  std::vector<QuadState> states;
  states.reserve(inputs.size() + 1);
  states.push_back(x0);
  for (const MotorCommand& u : inputs)
    states.push_back(step_rk4(states.back(), u, params_, cfg_.dt));
  return states;
}

OcpStructure NmpcSolver::structure(int neighbor_count) const {
  const int n = cfg_.steps();
  const int ecbf_nodes = cfg_.ecbf_every_node ? n : 1;
  OcpStructure s;
  s.box_rows = 2 * kNU * n;
  s.speed_rows = n;
  s.ecbf_rows = neighbor_count * ecbf_nodes;
  s.slack_rows = s.ecbf_rows + s.speed_rows;
  s.qp_vars = kNU * n + s.slack_rows;
  return s;
}

CondensedQp NmpcSolver::linearize(const QuadState& x0,
                                  const std::vector<MotorCommand>& inputs,
                                  const ReferenceWindow& ref,
                                  const std::vector<NeighborSnapshot>& neighbors) const {
  const int n = cfg_.steps();
  const int nu_total = kNU * n;
  const OcpStructure layout = structure(static_cast<int>(neighbors.size()));
  const int n_slack = layout.slack_rows;
  const int n_vars = nu_total + n_slack;

  CondensedQp out;
  out.n_inputs = nu_total;
  out.n_slacks = n_slack;

  // Rollout with sensitivities: sens[k] = d x_k / d (stacked inputs).
  std::vector<QuadState> states;
  states.reserve(n + 1);
  states.push_back(x0);
  std::vector<Eigen::MatrixXd> sens(n + 1, Eigen::MatrixXd::Zero(kNX, nu_total));
  for (int k = 0; k < n; ++k) {
    const StepJacobians sj = step_rk4_jacobians(states[k], inputs[k], params_, cfg_.dt);
    sens[k + 1] = sj.A * sens[k];
    sens[k + 1].block<kNX, kNU>(0, kNU * k) += sj.B;
    states.push_back(sj.next);
  }

  QpProblem& qp = out.qp;
  qp.H = Eigen::MatrixXd::Zero(n_vars, n_vars);
  qp.g = Eigen::VectorXd::Zero(n_vars);
  qp.Ae.resize(0, n_vars);
  qp.be.resize(0);

  // Tracking cost over states 1..N and inputs 0..N-1.
  const Eigen::Matrix<double, kNX, 1> qw = cfg_.state_weights();
  for (int k = 1; k <= n; ++k) {
    const QuadState::Vector err = states[k].to_vector() - ref.x[k].to_vector();
    const Eigen::MatrixXd wS = qw.asDiagonal() * sens[k];
    qp.H.topLeftCorner(nu_total, nu_total).noalias() +=
        2.0 * sens[k].transpose() * wS;
    qp.g.head(nu_total).noalias() += 2.0 * wS.transpose() * err;
  }
  for (int k = 0; k < n; ++k) {
    const Eigen::Vector4d du_err = inputs[k].u - ref.u[k].u;
    qp.H.block<kNU, kNU>(kNU * k, kNU * k).diagonal().array() += 2.0 * cfg_.r_input;
    qp.g.segment<kNU>(kNU * k) += 2.0 * cfg_.r_input * du_err;
  }
  // Slack block: L1 penalty plus a small quadratic keeping H positive definite.
  qp.H.bottomRightCorner(n_slack, n_slack).diagonal().array() += 2.0 * cfg_.slack_reg;
  qp.g.tail(n_slack).array() += cfg_.slack_penalty;

  const int n_rows = layout.box_rows + layout.speed_rows + layout.ecbf_rows + n_slack;
  qp.Ai = Eigen::MatrixXd::Zero(n_rows, n_vars);
  qp.bi = Eigen::VectorXd::Zero(n_rows);
  out.rows.reserve(n_rows);
  int row = 0;

  // Hard motor bounds.
  for (int k = 0; k < n; ++k) {
    for (int r = 0; r < kNU; ++r) {
      qp.Ai(row, kNU * k + r) = 1.0;
      qp.bi(row) = inputs[k].u(r) - params_.u_min;
      out.rows.push_back({RowInfo::Type::box_lower, k, -1});
      ++row;
      qp.Ai(row, kNU * k + r) = -1.0;
      qp.bi(row) = params_.u_max - inputs[k].u(r);
      out.rows.push_back({RowInfo::Type::box_upper, k, -1});
      ++row;
    }
  }

  // Soft speed cap |v|^2 <= v_max^2 at stages 1..N; slack indices follow the
  // ECBF block.
  const int slack_base = nu_total;
  const int speed_slack_base = slack_base + layout.ecbf_rows;
  for (int k = 1; k <= n; ++k) {
    const Eigen::Vector3d v = states[k].v;
    qp.Ai.row(row).head(nu_total) =
        -2.0 * v.transpose() * sens[k].block(3, 0, 3, nu_total);
    qp.Ai(row, speed_slack_base + (k - 1)) = 1.0;
    qp.bi(row) = params_.v_max * params_.v_max - v.squaredNorm();
    out.rows.push_back({RowInfo::Type::speed, k, -1});
    ++row;
  }

  // Softened barrier constraints, one row per (stage, neighbor).
  const int ecbf_nodes = cfg_.ecbf_every_node ? n : 1;
  int slack_idx = 0;
  for (int k = 0; k < ecbf_nodes; ++k) {
    const QuadState& xk = states[k];
    const double t_k = k * cfg_.dt;
    for (std::size_t j = 0; j < neighbors.size(); ++j) {
      const NeighborSnapshot& nb = neighbors[j];
      RelativeState rel = RelativeState::between(xk.p, xk.v, extrapolate_neighbor(nb, t_k), nb.v);
      const int s_col = slack_base + slack_idx;
      ++slack_idx;
      if (rel.distance() < kDegenerateDistance) {
        // Coincident centers carry no usable direction; leave a vacuous row.
        qp.Ai(row, s_col) = 1.0;
        qp.bi(row) = 0.0;
        out.rows.push_back({RowInfo::Type::ecbf, k, static_cast<int>(j)});
        ++row;
        continue;
      }
      if (cfg_.freeze_vrel) {
        const double frozen = (nb.v - x0.v).norm();
        rel.v_rel = rel.v_rel.norm() > 1e-12 ? Eigen::Vector3d(frozen * rel.v_rel.normalized())
                                             : Eigen::Vector3d(frozen, 0.0, 0.0);
      }
      const Eigen::Vector3d accel = translational_accel(xk, inputs[k], params_);
      const SafetyGeometry geom = pair_geometry(nb);
      EcbfGradients grad = ecbf_constraint_gradients(rel, geom, gains_, accel);
      if (cfg_.freeze_vrel) grad.d_v_i.setZero();

      // Chain d_accel through attitude and thrust.
      const DynamicsJacobians dyn = derivative_jacobians(xk, inputs[k], params_);
      Eigen::Matrix<double, 1, kNX> row_x = Eigen::Matrix<double, 1, kNX>::Zero();
      row_x.segment<3>(0) = grad.d_p_i;
      row_x.segment<3>(3) = grad.d_v_i;
      row_x.segment<4>(6) = grad.d_accel_i.transpose() * dyn.A.block<3, 4>(3, 6);
      const Eigen::Matrix<double, 1, kNU> row_u =
          grad.d_accel_i.transpose() * dyn.B.block<3, kNU>(3, 0);

      qp.Ai.row(row).head(nu_total) = row_x * sens[k];
      qp.Ai.row(row).segment<kNU>(kNU * k) += row_u;
      qp.Ai(row, s_col) = 1.0;
      qp.bi(row) = grad.value;
      out.rows.push_back({RowInfo::Type::ecbf, k, static_cast<int>(j)});
      ++row;
    }
  }

  // Slack nonnegativity.
  for (int sidx = 0; sidx < n_slack; ++sidx) {
    qp.Ai(row, slack_base + sidx) = 1.0;
    qp.bi(row) = 0.0;
    out.rows.push_back({RowInfo::Type::slack_nonneg, -1, -1});
    ++row;
  }

  return out;
}

double NmpcSolver::tracking_cost(const std::vector<QuadState>& states,
                                 const std::vector<MotorCommand>& inputs,
                                 const ReferenceWindow& ref) const {
  const int n = cfg_.steps();
  const Eigen::Matrix<double, kNX, 1> qw = cfg_.state_weights();
  double cost = 0.0;
  for (int k = 1; k <= n; ++k) {
    const QuadState::Vector err = states[k].to_vector() - ref.x[k].to_vector();
    cost += err.dot(qw.asDiagonal() * err);
  }
  for (int k = 0; k < n; ++k)
    cost += cfg_.r_input * (inputs[k].u - ref.u[k].u).squaredNorm();
  return cost;
}

double NmpcSolver::merit(const QuadState& x0, const std::vector<MotorCommand>& inputs,
                         const ReferenceWindow& ref,
                         const std::vector<NeighborSnapshot>& neighbors) const {
  const int n = cfg_.steps();
  const std::vector<QuadState> states = rollout(x0, inputs);
  double penalty = 0.0;
  for (int k = 1; k <= n; ++k)
    penalty += std::max(0.0, states[k].v.squaredNorm() - params_.v_max * params_.v_max);
  const int ecbf_nodes = cfg_.ecbf_every_node ? n : 1;
  for (int k = 0; k < ecbf_nodes; ++k) {
    for (const NeighborSnapshot& nb : neighbors) {
      RelativeState rel = RelativeState::between(
          states[k].p, states[k].v, extrapolate_neighbor(nb, k * cfg_.dt), nb.v);
      if (rel.distance() < kDegenerateDistance) continue;
      const Eigen::Vector3d accel = translational_accel(states[k], inputs[k], params_);
      const double g = ecbf_constraint(rel, pair_geometry(nb), gains_, accel);
      penalty += std::max(0.0, -g);
    }
  }
  return tracking_cost(states, inputs, ref) + cfg_.slack_penalty * penalty;
}

OcpSolution NmpcSolver::solve(const QuadState& x0, const ReferenceWindow& ref,
                              const std::vector<NeighborSnapshot>& neighbors) {
  const auto t_start = std::chrono::steady_clock::now();
  const int n = cfg_.steps();
  if (static_cast<int>(ref.x.size()) != n + 1 || static_cast<int>(ref.u.size()) != n)
    throw std::invalid_argument("nmpc: reference window size mismatch");
  if (!x0.finite()) throw std::invalid_argument("nmpc: non-finite initial state");

  // Shifted warm start, duplicating the last stage; cold start on the reference.
  std::vector<MotorCommand> U;
  if (static_cast<int>(warm_.size()) == n) {
    U.assign(warm_.begin() + 1, warm_.end());
    U.push_back(warm_.back());
  } else {
    U = ref.u;
  }
  for (MotorCommand& u : U)
    u.u = u.u.cwiseMax(params_.u_min).cwiseMin(params_.u_max);

  OcpSolution sol;
  sol.status = SolveStatus::max_iters;

  const int iters = cfg_.rti ? 1 : cfg_.max_sqp_iters;
  double kkt = std::numeric_limits<double>::infinity();
  for (int it = 0; it < iters; ++it) {
    const CondensedQp lin = linearize(x0, U, ref, neighbors);
    QpOptions qopt;
    qopt.diag_regularization = cfg_.qp_regularization;
    const QpSolution qsol = solve_qp(lin.qp, qopt);
    sol.stats.qp_iterations += qsol.iterations;
    if (qsol.status == QpStatus::infeasible) {
      sol.status = SolveStatus::infeasible_qp;
      break;
    }

    std::vector<MotorCommand> step(n);
    double step_norm = 0.0;
    for (int k = 0; k < n; ++k) {
      step[k].u = qsol.z.segment<kNU>(kNU * k);
      step_norm = std::max(step_norm, step[k].u.lpNorm<Eigen::Infinity>());
    }
    sol.slacks = qsol.z.tail(lin.n_slacks);

    double alpha = 1.0;
    if (!cfg_.rti && step_norm > cfg_.kkt_tol) {
      const double m0 = merit(x0, U, ref, neighbors);
      bool accepted = false;
      while (alpha > 1e-4) {
        std::vector<MotorCommand> trial = U;
        for (int k = 0; k < n; ++k) trial[k].u += alpha * step[k].u;
        if (merit(x0, trial, ref, neighbors) <= m0 - 1e-12 * alpha) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) alpha = 0.0;
    }

    for (int k = 0; k < n; ++k) {
      U[k].u += alpha * step[k].u;
      U[k].u = U[k].u.cwiseMax(params_.u_min).cwiseMin(params_.u_max);
    }

    sol.stats.sqp_iterations = it + 1;
    kkt = alpha * step_norm;
    if (kkt <= cfg_.kkt_tol) {
      sol.status = SolveStatus::solved;
      break;
    }
  }

  if (sol.status == SolveStatus::max_iters && kkt <= cfg_.kkt_tol)
    sol.status = SolveStatus::solved;

  sol.u = U;
  sol.x = rollout(x0, U);
  sol.kkt_residual = kkt;
  sol.stats.kkt_residual = kkt;
  sol.stats.max_slack = sol.slacks.size() > 0 ? sol.slacks.maxCoeff() : 0.0;
  warm_ = U;

  sol.stats.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                t_start)
          .count();
  return sol;
}

}  // namespace quadswarm
