#pragma once

#include "quadswarm/ecbf.hpp"
#include "quadswarm/nmpc.hpp"
#include "quadswarm/types.hpp"

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace quadswarm {

/// Enforced clearances: d_s between agents, d_so between agents and obstacles.
struct SafetyMargins {
  double d_s = 0.4;   // m
  double d_so = 0.2;  // m
};

struct Obstacle {
  int id = 0;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  double radius = 0.0;
};

/// Seeded world description: randomized placement parameters, detection
/// ranges, vehicle/controller parameters and run control.
struct ScenarioConfig {
  std::uint64_t seed = 1;
  int n_agents = 2;
  int n_obstacles = 0;
  Eigen::Vector3d env_min{-8.0, -8.0, 0.5};
  Eigen::Vector3d env_max{8.0, 8.0, 2.0};
  double r_o_min = 0.1;  // m
  double r_o_max = 1.0;  // m
  double r_dd = std::numeric_limits<double>::infinity();   // agent-agent range
  double r_ddo = std::numeric_limits<double>::infinity();  // agent-obstacle range
  SafetyMargins margins;
  EcbfGains gains = EcbfGains::from_alphas(36.0, 22.0);
  QuadParams params;
  OcpConfig ocp;
  double sim_duration = 40.0;  // s
  double control_dt = 0.1;     // s
  int plant_substeps = 10;
  int back_and_forth_cycles = 0;  // 0: single leg start -> goal
  double goal_capture_radius = 0.1;  // m
  double goal_capture_speed = 0.1;   // m/s
  int max_placement_attempts = 20000;

  // Scripted layouts bypass randomization (used by the worst-case swap and
  // the crossing scene); sizes must then match n_agents / n_obstacles.
  std::vector<Eigen::Vector3d> fixed_starts;
  std::vector<Eigen::Vector3d> fixed_goals;
  std::vector<Obstacle> fixed_obstacles;

  bool has_fixed_layout() const { return !fixed_starts.empty(); }
  void validate() const;
};

/// Initial agent states, goals and the obstacle field.
struct World {
  std::vector<QuadState> states;
  std::vector<Eigen::Vector3d> starts;
  std::vector<Eigen::Vector3d> goals;
  std::vector<Obstacle> obstacles;
};

/// Deterministic uniform sampler; the same seed always reproduces the same
/// draw sequence independent of the standard library's distribution details.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * ((gen_() >> 11) * 0x1.0p-53);
  }
  Eigen::Vector3d uniform_box(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
    return {uniform(lo.x(), hi.x()), uniform(lo.y(), hi.y()), uniform(lo.z(), hi.z())};
  }

 private:
  std::mt19937_64 gen_;
};

/// Uniform i.i.d. placement with rejection resampling of anything violating
/// the initial safety margins. Throws GenerationError when the attempt
/// budget runs out.
World generate_scenario(const ScenarioConfig& cfg);

}  // namespace quadswarm
