#pragma once

#include "quadswarm/dynamics.hpp"
#include "quadswarm/ecbf.hpp"
#include "quadswarm/qp.hpp"

#include <cmath>
#include <vector>

namespace quadswarm {

/// Horizon, weights and solver knobs of the per-agent optimal control problem.
struct OcpConfig {
  double horizon = 1.0;  // s
  double dt = 0.1;       // s, shooting interval

  double q_pos = 10.0;
  double q_vel = 1.0;
  double q_att = 1.0;
  double q_rate = 0.1;
  double r_input = 0.1;

  double slack_penalty = 1e4;  // L1 weight on constraint softening
  double slack_reg = 1e-4;     // quadratic slack term keeping the QP strictly convex

  int max_sqp_iters = 30;      // full-SQP cap; RTI mode always runs one
  double kkt_tol = 1e-6;
  bool rti = true;
  bool ecbf_every_node = true;  // false: constrain only the first node (ablation)
  bool freeze_vrel = false;     // true: reuse the stage-0 relative speed (ablation)
  double qp_regularization = 1e-8;

  int steps() const { return static_cast<int>(std::lround(horizon / dt)); }

  void validate() const {
    if (!(dt > 0.0) || !(horizon > 0.0))
      throw ConfigError("ocp: horizon and dt must be > 0");
    if (std::abs(steps() * dt - horizon) > 1e-9)
      throw ConfigError("ocp: horizon must be an integer multiple of dt");
    if (q_pos < 0 || q_vel < 0 || q_att < 0 || q_rate < 0 || r_input < 0)
      throw ConfigError("ocp: weights must be >= 0");
    if (!(slack_penalty > 0.0)) throw ConfigError("ocp: slack_penalty must be > 0");
  }

  Eigen::Matrix<double, QuadState::kDim, 1> state_weights() const {
    Eigen::Matrix<double, QuadState::kDim, 1> w;
    w.segment<3>(0).setConstant(q_pos);
    w.segment<3>(3).setConstant(q_vel);
    w.segment<4>(6).setConstant(q_att);
    w.segment<3>(10).setConstant(q_rate);
    return w;
  }
};

/// What the ego vehicle knows about one detected entity at solve time.
struct NeighborSnapshot {
  int id = 0;
  enum class Kind { agent, obstacle } kind = Kind::agent;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Eigen::Vector3d v = Eigen::Vector3d::Zero();  // zero for obstacles
  double radius = 0.0;
};

/// Constant-velocity extrapolation used for every neighbor over the horizon.
inline Eigen::Vector3d extrapolate_neighbor(const NeighborSnapshot& nb, double t) {
  return nb.p + t * nb.v;
}

/// Reference trajectory sampled at the shooting nodes: N+1 states, N inputs.
struct ReferenceWindow {
  std::vector<QuadState> x;
  std::vector<MotorCommand> u;
};

enum class SolveStatus { solved, max_iters, infeasible_qp };

struct SolverStats {
  int sqp_iterations = 0;
  int qp_iterations = 0;
  double kkt_residual = 0.0;
  double max_slack = 0.0;
  double wall_ms = 0.0;
};

struct OcpSolution {
  std::vector<MotorCommand> u;  // N inputs
  std::vector<QuadState> x;     // N+1 states, nonlinear rollout of u
  Eigen::VectorXd slacks;
  double kkt_residual = 0.0;
  SolveStatus status = SolveStatus::max_iters;
  SolverStats stats;

  const MotorCommand& first() const { return u.front(); }
};

/// Row counts of the transcribed subproblem, for inspection.
struct OcpStructure {
  int qp_vars = 0;
  int box_rows = 0;
  int speed_rows = 0;
  int ecbf_rows = 0;
  int slack_rows = 0;  // nonnegativity rows, ECBF and speed softening together
};

/// Labels tying QP inequality rows back to their origin.
struct RowInfo {
  enum class Type { box_lower, box_upper, speed, ecbf, slack_nonneg } type;
  int stage = 0;
  int neighbor = -1;  // index into the snapshot list, -1 when not applicable
};

struct CondensedQp {
  QpProblem qp;
  std::vector<RowInfo> rows;  // one per inequality row
  int n_inputs = 0;           // leading QP variables are stacked input deltas
  int n_slacks = 0;
};

/// Decentralized NMPC for one vehicle: direct multiple shooting condensed to
/// the input space, Gauss-Newton SQP with optional real-time-iteration mode,
/// softened barrier and speed constraints, hard motor bounds. One instance
/// per agent; instances share nothing but a single instance is not reentrant
/// (the warm start lives in the solver).
class NmpcSolver {
 public:
  NmpcSolver(const QuadParams& params, const OcpConfig& cfg, const EcbfGains& gains,
             double d_s, double d_so);

  /// Solve from x0 against a reference window and snapshot neighbor set.
  /// Warm starts from the previous call's input trajectory, shifted one stage.
  OcpSolution solve(const QuadState& x0, const ReferenceWindow& ref,
                    const std::vector<NeighborSnapshot>& neighbors);

  /// Linearize at a given input trajectory. Exposed so tests can check row
  /// Jacobians against finite differences of the rebuilt linearization.
  CondensedQp linearize(const QuadState& x0, const std::vector<MotorCommand>& inputs,
                        const ReferenceWindow& ref,
                        const std::vector<NeighborSnapshot>& neighbors) const;

  /// Nonlinear rollout of an input trajectory.
  std::vector<QuadState> rollout(const QuadState& x0,
                                 const std::vector<MotorCommand>& inputs) const;

  OcpStructure structure(int neighbor_count) const;

  /// Tracking cost plus exact-penalty terms; the merit function of the line search.
  double merit(const QuadState& x0, const std::vector<MotorCommand>& inputs,
               const ReferenceWindow& ref,
               const std::vector<NeighborSnapshot>& neighbors) const;

  void reset_warm_start() { warm_.clear(); }

  const OcpConfig& config() const { return cfg_; }
  const QuadParams& params() const { return params_; }

 private:
  SafetyGeometry pair_geometry(const NeighborSnapshot& nb) const;
  double tracking_cost(const std::vector<QuadState>& states,
                       const std::vector<MotorCommand>& inputs,
                       const ReferenceWindow& ref) const;

  QuadParams params_;
  OcpConfig cfg_;
  EcbfGains gains_;
  double d_s_;
  double d_so_;
  std::vector<MotorCommand> warm_;
};

}  // namespace quadswarm
