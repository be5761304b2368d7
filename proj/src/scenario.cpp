#include "quadswarm/scenario.hpp"

#include <string>

namespace quadswarm {

void ScenarioConfig::validate() const {
  if (n_agents < 1) throw ConfigError("scenario: need at least one agent");
  if (n_obstacles < 0) throw ConfigError("scenario: negative obstacle count");
  if (!((env_max - env_min).array() > 0.0).all())
    throw ConfigError("scenario: empty environment bounds");
  if (n_obstacles > 0 && !(r_o_min > 0.0 && r_o_min <= r_o_max))
    throw ConfigError("scenario: obstacle radius interval must be within (0, inf)");
  if (!(r_dd > 0.0) || !(r_ddo > 0.0))
    throw ConfigError("scenario: detection ranges must be positive");
  if (!(control_dt > 0.0) || !(sim_duration > 0.0))
    throw ConfigError("scenario: control_dt and sim_duration must be positive");
  if (plant_substeps < 1) throw ConfigError("scenario: plant_substeps must be >= 1");
  if (margins.d_s < 0.0 || margins.d_so < 0.0)
    throw ConfigError("scenario: negative safety margin");
  params.validate();
  ocp.validate();
  if (has_fixed_layout()) {
    if (static_cast<int>(fixed_starts.size()) != n_agents ||
        static_cast<int>(fixed_goals.size()) != n_agents)
      throw ConfigError("scenario: fixed layout sizes do not match n_agents");
    if (static_cast<int>(fixed_obstacles.size()) != n_obstacles)
      throw ConfigError("scenario: fixed obstacle count does not match n_obstacles");
  }
}

namespace {

QuadState rest_state(const Eigen::Vector3d& p) {
  QuadState s;
  s.p = p;
  return s;
}

}  // namespace

World generate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  World world;

  if (cfg.has_fixed_layout()) {
    world.starts = cfg.fixed_starts;
    world.goals = cfg.fixed_goals;
    world.obstacles = cfg.fixed_obstacles;
    for (const Eigen::Vector3d& p : world.starts) world.states.push_back(rest_state(p));
    return world;
  }

  Rng rng(cfg.seed);
  const double r_q = cfg.params.radius;
  const double agent_clear = cfg.margins.d_s + 2.0 * r_q;
  // Goals additionally clear the capture sphere so that every agent can sit
  // on its goal without tripping a barrier.
  const double goal_clear = agent_clear + 2.0 * cfg.goal_capture_radius;

  int budget = cfg.max_placement_attempts;
  const auto draw = [&](auto&& accept) {
    while (budget-- > 0) {
      const Eigen::Vector3d p = rng.uniform_box(cfg.env_min, cfg.env_max);
      if (accept(p)) return p;
    }
    throw GenerationError("scenario generation: placement budget exhausted (seed " +
                          std::to_string(cfg.seed) + ")");
  };

  for (int k = 0; k < cfg.n_obstacles; ++k) {
    Obstacle ob;
    ob.id = k;
    ob.radius = rng.uniform(cfg.r_o_min, cfg.r_o_max);
    ob.p = rng.uniform_box(cfg.env_min, cfg.env_max);
    world.obstacles.push_back(ob);
  }

  const auto obstacle_clearance_ok = [&](const Eigen::Vector3d& p, double extra) {
    for (const Obstacle& ob : world.obstacles) {
      const double need = cfg.margins.d_so + r_q + ob.radius + extra;
      if ((p - ob.p).norm() < need) return false;
    }
    return true;
  };

  for (int i = 0; i < cfg.n_agents; ++i) {
    const Eigen::Vector3d start = draw([&](const Eigen::Vector3d& p) {
      for (const Eigen::Vector3d& other : world.starts)
        if ((p - other).norm() < agent_clear) return false;
      return obstacle_clearance_ok(p, 0.0);
    });
    world.starts.push_back(start);
    world.states.push_back(rest_state(start));
  }

  for (int i = 0; i < cfg.n_agents; ++i) {
    const Eigen::Vector3d goal = draw([&](const Eigen::Vector3d& p) {
      for (const Eigen::Vector3d& other : world.goals)
        if ((p - other).norm() < goal_clear) return false;
      return obstacle_clearance_ok(p, cfg.goal_capture_radius);
    });
    world.goals.push_back(goal);
  }

  return world;
}

}  // namespace quadswarm
