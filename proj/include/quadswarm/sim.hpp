#pragma once

#include "quadswarm/min_jerk.hpp"
#include "quadswarm/scenario.hpp"

#include <string>
#include <utility>

namespace quadswarm {

struct AgentStepStats {
  int sqp_iterations = 0;
  double kkt_residual = 0.0;
  double max_slack = 0.0;
  double wall_ms = 0.0;
  SolveStatus status = SolveStatus::solved;
  bool held_previous_command = false;  // infeasible-QP fallback
};

struct AgentRecord {
  QuadState state;
  MotorCommand cmd;
  std::vector<int> agent_neighbors;
  std::vector<int> obstacle_neighbors;
  AgentStepStats stats;
};

struct StepRecord {
  double t = 0.0;
  std::vector<AgentRecord> agents;
  std::vector<double> agent_agent_distance;     // upper triangle, (i,j) i<j row-major
  std::vector<double> agent_obstacle_distance;  // n_agents x n_obstacles row-major
};

/// Complete timestamped record of one rollout on the control grid.
struct SimTrace {
  int schema_version = 1;
  ScenarioConfig config;
  World world;  // initial states, goals, obstacle field
  std::vector<StepRecord> steps;

  /// FNV-1a over the dynamical content (times, states, commands, distances,
  /// neighbor sets). Timing diagnostics are deliberately excluded.
  std::uint64_t hash() const;

  double pair_distance(const StepRecord& rec, int i, int j) const;
};

struct ViolationEvent {
  int a = 0;  // agent index
  int b = 0;  // other agent, or obstacle id
  double onset_time = 0.0;
  double min_distance = 0.0;
};

/// One event per pair per run, counted at onset; re-entry does not recount.
struct ViolationReport {
  std::vector<ViolationEvent> agent_agent;
  std::vector<ViolationEvent> agent_obstacle;

  int total() const {
    return static_cast<int>(agent_agent.size() + agent_obstacle.size());
  }

  static ViolationReport from_trace(const SimTrace& trace);
};

/// Snapshot-based neighborhood: entities within the inclusive detection
/// radii, self excluded. Obstacles report zero velocity.
std::pair<std::vector<NeighborSnapshot>, std::vector<NeighborSnapshot>> detect_neighbors(
    const std::vector<QuadState>& states, const std::vector<Obstacle>& obstacles,
    int agent, double r_dd, double r_ddo);

/// Closed-loop decentralized simulation. Each control step freezes a global
/// snapshot, every agent solves its own NMPC against that snapshot only, and
/// all first-stage commands are applied simultaneously.
class Simulator {
 public:
  explicit Simulator(const ScenarioConfig& cfg);
  Simulator(const ScenarioConfig& cfg, World world);

  void step();

  struct RunResult {
    SimTrace trace;
    ViolationReport violations;
    bool all_reached = false;
    double end_time = 0.0;
  };

  /// Runs until every agent has captured its final waypoint (within the
  /// capture radius, below the capture speed) or sim_duration elapses.
  RunResult run();

  double time() const { return t_; }
  const World& world() const { return world_; }
  const SimTrace& trace() const { return trace_; }
  bool all_captured() const;

  /// Smallest agent-agent gap above the enforced distance, over the whole
  /// trace so far; negative values are violations.
  double min_agent_agent_distance() const;
  double min_agent_obstacle_clearance() const;  // min over pairs of (dist - threshold)

 private:
  void init();
  ReferenceWindow reference_window(int agent) const;
  void record(const std::vector<AgentRecord>& agents);
  void update_legs();

  ScenarioConfig cfg_;
  World world_;
  std::vector<NmpcSolver> solvers_;
  std::vector<MinJerkReference> refs_;
  std::vector<double> ref_clock_;
  std::vector<int> leg_;  // completed-waypoint progress for back-and-forth mode
  int total_legs_ = 1;
  std::vector<bool> captured_;
  std::vector<MotorCommand> last_cmd_;
  SimTrace trace_;
  double t_ = 0.0;
};

/// Convenience wrapper matching the one-call contract.
Simulator::RunResult run_scenario(const ScenarioConfig& cfg);

// --- Randomized campaign -----------------------------------------------

struct SweepCell {
  int n_agents = 0;
  int n_obstacles = 0;
};

struct RegimeSpec {
  std::string name;
  double r_dd = 0.0;
  double r_ddo = 0.0;
};

struct SweepRow {
  SweepCell cell;
  std::string regime;
  int runs = 0;
  int total_violations = 0;
  int agent_agent_violations = 0;
  int agent_obstacle_violations = 0;
  int generation_failures = 0;
  int runs_all_reached = 0;
};

/// One row per (cell, regime): summed onset-counted violations across the
/// given seeds. Matched seeds across regimes by construction. Deterministic
/// for fixed inputs at any parallelism level.
std::vector<SweepRow> sweep_campaign(const ScenarioConfig& base,
                                     const std::vector<SweepCell>& cells,
                                     const std::vector<RegimeSpec>& regimes,
                                     const std::vector<std::uint64_t>& seeds,
                                     int parallelism);

}  // namespace quadswarm
