#include "quadswarm/sim.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace quadswarm {

namespace {

std::uint64_t fnv1a_init() { return 0xcbf29ce484222325ull; }

void fnv1a_bytes(std::uint64_t& h, const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x00000100000001b3ull;
  }
}

void fnv1a_double(std::uint64_t& h, double v) { fnv1a_bytes(h, &v, sizeof(v)); }

void fnv1a_int(std::uint64_t& h, std::int64_t v) { fnv1a_bytes(h, &v, sizeof(v)); }

int upper_triangle_index(int n, int i, int j) {
  // (i, j) with i < j into row-major upper-triangle storage.
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

}  // namespace

std::uint64_t SimTrace::hash() const {
  std::uint64_t h = fnv1a_init();
  fnv1a_int(h, schema_version);
  fnv1a_int(h, config.n_agents);
  fnv1a_int(h, config.n_obstacles);
  fnv1a_int(h, static_cast<std::int64_t>(config.seed));
  for (const Obstacle& ob : world.obstacles) {
    fnv1a_double(h, ob.p.x());
    fnv1a_double(h, ob.p.y());
    fnv1a_double(h, ob.p.z());
    fnv1a_double(h, ob.radius);
  }
  for (const StepRecord& rec : steps) {
    fnv1a_double(h, rec.t);
    for (const AgentRecord& ar : rec.agents) {
      const QuadState::Vector x = ar.state.to_vector();
      for (int k = 0; k < QuadState::kDim; ++k) fnv1a_double(h, x(k));
      for (int k = 0; k < 4; ++k) fnv1a_double(h, ar.cmd.u(k));
      for (int id : ar.agent_neighbors) fnv1a_int(h, id);
      for (int id : ar.obstacle_neighbors) fnv1a_int(h, id);
    }
    for (double d : rec.agent_agent_distance) fnv1a_double(h, d);
    for (double d : rec.agent_obstacle_distance) fnv1a_double(h, d);
  }
  return h;
}

double SimTrace::pair_distance(const StepRecord& rec, int i, int j) const {
  if (i > j) std::swap(i, j);
  return rec.agent_agent_distance[upper_triangle_index(config.n_agents, i, j)];
}

ViolationReport ViolationReport::from_trace(const SimTrace& trace) {
  ViolationReport report;
  const int n = trace.config.n_agents;
  const double agent_threshold =
      trace.config.margins.d_s + 2.0 * trace.config.params.radius;

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      bool violated_before = false;
      bool event_open = false;
      ViolationEvent ev{i, j, 0.0, std::numeric_limits<double>::infinity()};
      for (const StepRecord& rec : trace.steps) {
        const double d = trace.pair_distance(rec, i, j);
        ev.min_distance = std::min(ev.min_distance, d);
        const bool violating = d < agent_threshold;
        if (violating && !violated_before && !event_open) {
          ev.onset_time = rec.t;
          event_open = true;
        }
        violated_before = violating;
      }
      if (event_open) report.agent_agent.push_back(ev);
    }
  }

  for (int i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < trace.world.obstacles.size(); ++j) {
      const double threshold = trace.config.margins.d_so +
                               trace.config.params.radius +
                               trace.world.obstacles[j].radius;
      bool event_open = false;
      ViolationEvent ev{i, static_cast<int>(j), 0.0,
                        std::numeric_limits<double>::infinity()};
      for (const StepRecord& rec : trace.steps) {
        const double d =
            rec.agent_obstacle_distance[i * trace.world.obstacles.size() + j];
        ev.min_distance = std::min(ev.min_distance, d);
        if (d < threshold && !event_open) {
          ev.onset_time = rec.t;
          event_open = true;
        }
      }
      if (event_open) report.agent_obstacle.push_back(ev);
    }
  }
  return report;
}

std::pair<std::vector<NeighborSnapshot>, std::vector<NeighborSnapshot>> detect_neighbors(
    const std::vector<QuadState>& states, const std::vector<Obstacle>& obstacles,
    int agent, double r_dd, double r_ddo) {
  std::vector<NeighborSnapshot> agents;
  std::vector<NeighborSnapshot> obs;
  const Eigen::Vector3d& p_i = states[agent].p;
  for (int j = 0; j < static_cast<int>(states.size()); ++j) {
    if (j == agent) continue;
    if ((states[j].p - p_i).norm() <= r_dd) {
      NeighborSnapshot nb;
      nb.id = j;
      nb.kind = NeighborSnapshot::Kind::agent;
      nb.p = states[j].p;
      nb.v = states[j].v;
      agents.push_back(nb);
    }
  }
  for (const Obstacle& ob : obstacles) {
    if ((ob.p - p_i).norm() <= r_ddo) {
      NeighborSnapshot nb;
      nb.id = ob.id;
      nb.kind = NeighborSnapshot::Kind::obstacle;
      nb.p = ob.p;
      nb.radius = ob.radius;
      obs.push_back(nb);
    }
  }
  return {std::move(agents), std::move(obs)};
}

Simulator::Simulator(const ScenarioConfig& cfg) : Simulator(cfg, generate_scenario(cfg)) {}

Simulator::Simulator(const ScenarioConfig& cfg, World world)
    : cfg_(cfg), world_(std::move(world)) {
  cfg_.validate();
  init();
}

void Simulator::init() {
  const int n = cfg_.n_agents;
  // Neighbor radius in the solver comes from the snapshots; only margins and
  // the ego radius live in the solver itself.
  solvers_.reserve(n);
  for (int i = 0; i < n; ++i)
    solvers_.emplace_back(cfg_.params, cfg_.ocp, cfg_.gains, cfg_.margins.d_s,
                          cfg_.margins.d_so);
  total_legs_ = cfg_.back_and_forth_cycles > 0 ? 2 * cfg_.back_and_forth_cycles : 1;
  refs_.resize(n);
  ref_clock_.assign(n, 0.0);
  leg_.assign(n, 0);
  captured_.assign(n, false);
  last_cmd_.assign(n, hover_command(cfg_.params));
  for (int i = 0; i < n; ++i)
    refs_[i] = MinJerkReference(world_.starts[i], world_.goals[i], cfg_.params.v_max,
                                cfg_.params.a_max);

  trace_.schema_version = 1;
  trace_.config = cfg_;
  trace_.world = world_;

  std::vector<AgentRecord> initial(n);
  for (int i = 0; i < n; ++i) {
    initial[i].state = world_.states[i];
    initial[i].cmd = last_cmd_[i];
  }
  record(initial);
}

ReferenceWindow Simulator::reference_window(int agent) const {
  const int steps = cfg_.ocp.steps();
  ReferenceWindow ref;
  ref.x.reserve(steps + 1);
  ref.u.assign(steps, hover_command(cfg_.params));
  for (int k = 0; k <= steps; ++k)
    ref.x.push_back(refs_[agent].state(ref_clock_[agent] + k * cfg_.ocp.dt));
  return ref;
}

void Simulator::record(const std::vector<AgentRecord>& agents) {
  StepRecord rec;
  rec.t = t_;
  rec.agents = agents;
  const int n = cfg_.n_agents;
  rec.agent_agent_distance.reserve(n * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      rec.agent_agent_distance.push_back((world_.states[i].p - world_.states[j].p).norm());
  rec.agent_obstacle_distance.reserve(n * world_.obstacles.size());
  for (int i = 0; i < n; ++i)
    for (const Obstacle& ob : world_.obstacles)
      rec.agent_obstacle_distance.push_back((world_.states[i].p - ob.p).norm());
  trace_.steps.push_back(std::move(rec));
}

void Simulator::update_legs() {
  for (int i = 0; i < cfg_.n_agents; ++i) {
    if (captured_[i]) continue;
    const Eigen::Vector3d waypoint = refs_[i].goal();
    const bool at_waypoint =
        (world_.states[i].p - waypoint).norm() <= cfg_.goal_capture_radius &&
        world_.states[i].v.norm() <= cfg_.goal_capture_speed;
    if (!at_waypoint) continue;
    if (leg_[i] + 1 >= total_legs_) {
      captured_[i] = true;
      continue;
    }
    leg_[i]++;
    // Even legs head to the goal, odd legs return to the start.
    const Eigen::Vector3d& next =
        (leg_[i] % 2 == 0) ? world_.goals[i] : world_.starts[i];
    refs_[i] = MinJerkReference(world_.states[i].p, next, cfg_.params.v_max,
                                cfg_.params.a_max);
    ref_clock_[i] = 0.0;
  }
}

void Simulator::step() {
  const int n = cfg_.n_agents;
  const std::vector<QuadState> snapshot = world_.states;

  std::vector<AgentRecord> records(n);
  for (int i = 0; i < n; ++i) {
    auto [agents, obstacles] =
        detect_neighbors(snapshot, world_.obstacles, i, cfg_.r_dd, cfg_.r_ddo);
    std::vector<NeighborSnapshot> neighbors = agents;
    neighbors.insert(neighbors.end(), obstacles.begin(), obstacles.end());

    const OcpSolution sol = solvers_[i].solve(snapshot[i], reference_window(i), neighbors);

    AgentRecord& rec = records[i];
    rec.stats.sqp_iterations = sol.stats.sqp_iterations;
    rec.stats.kkt_residual = sol.kkt_residual;
    rec.stats.max_slack = sol.stats.max_slack;
    rec.stats.wall_ms = sol.stats.wall_ms;
    rec.stats.status = sol.status;
    if (sol.status == SolveStatus::infeasible_qp) {
      rec.cmd = last_cmd_[i];
      rec.stats.held_previous_command = true;
    } else {
      rec.cmd = sol.first();
    }
    for (const NeighborSnapshot& nb : agents) rec.agent_neighbors.push_back(nb.id);
    for (const NeighborSnapshot& nb : obstacles) rec.obstacle_neighbors.push_back(nb.id);
  }

  const double h = cfg_.control_dt / cfg_.plant_substeps;
  for (int i = 0; i < n; ++i) {
    for (int s = 0; s < cfg_.plant_substeps; ++s)
      world_.states[i] = step_rk4(world_.states[i], records[i].cmd, cfg_.params, h);
    records[i].state = world_.states[i];
    last_cmd_[i] = records[i].cmd;
    ref_clock_[i] += cfg_.control_dt;
  }
  t_ += cfg_.control_dt;

  update_legs();
  record(records);
}

bool Simulator::all_captured() const {
  for (bool c : captured_)
    if (!c) return false;
  return true;
}

double Simulator::min_agent_agent_distance() const {
  double best = std::numeric_limits<double>::infinity();
  for (const StepRecord& rec : trace_.steps)
    for (double d : rec.agent_agent_distance) best = std::min(best, d);
  return best;
}

double Simulator::min_agent_obstacle_clearance() const {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n_obs = world_.obstacles.size();
  for (const StepRecord& rec : trace_.steps) {
    for (std::size_t idx = 0; idx < rec.agent_obstacle_distance.size(); ++idx) {
      const double threshold = cfg_.margins.d_so + cfg_.params.radius +
                               world_.obstacles[idx % n_obs].radius;
      best = std::min(best, rec.agent_obstacle_distance[idx] - threshold);
    }
  }
  return best;
}

Simulator::RunResult Simulator::run() {
  const int max_steps =
      static_cast<int>(std::ceil(cfg_.sim_duration / cfg_.control_dt + 1e-9));
  for (int k = 0; k < max_steps && !all_captured(); ++k) step();

  RunResult result;
  result.trace = trace_;
  result.violations = ViolationReport::from_trace(trace_);
  result.all_reached = all_captured();
  result.end_time = t_;
  return result;
}

Simulator::RunResult run_scenario(const ScenarioConfig& cfg) {
  Simulator sim(cfg);
  return sim.run();
}

std::vector<SweepRow> sweep_campaign(const ScenarioConfig& base,
                                     const std::vector<SweepCell>& cells,
                                     const std::vector<RegimeSpec>& regimes,
                                     const std::vector<std::uint64_t>& seeds,
                                     int parallelism) {
  struct Task {
    std::size_t row;
    std::uint64_t seed;
  };
  std::vector<SweepRow> rows;
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::size_t r = 0; r < regimes.size(); ++r) {
      SweepRow row;
      row.cell = cells[c];
      row.regime = regimes[r].name;
      rows.push_back(row);
      for (std::uint64_t seed : seeds) tasks.push_back({rows.size() - 1, seed});
    }
  }

  struct Outcome {
    int total = 0;
    int agent_agent = 0;
    int agent_obstacle = 0;
    bool generation_failed = false;
    bool all_reached = false;
  };
  std::vector<Outcome> outcomes(tasks.size());

  const auto worker_body = [&](std::size_t task_idx) {
    const Task& task = tasks[task_idx];
    const SweepRow& row = rows[task.row];
    ScenarioConfig cfg = base;
    cfg.seed = task.seed;
    cfg.n_agents = row.cell.n_agents;
    cfg.n_obstacles = row.cell.n_obstacles;
    for (const RegimeSpec& regime : regimes) {
      if (regime.name == row.regime) {
        cfg.r_dd = regime.r_dd;
        cfg.r_ddo = regime.r_ddo;
      }
    }
    Outcome& out = outcomes[task_idx];
    try {
      const Simulator::RunResult res = run_scenario(cfg);
      out.total = res.violations.total();
      out.agent_agent = static_cast<int>(res.violations.agent_agent.size());
      out.agent_obstacle = static_cast<int>(res.violations.agent_obstacle.size());
      out.all_reached = res.all_reached;
    } catch (const GenerationError&) {
      out.generation_failed = true;
    }
  };

  const int workers = std::max(1, parallelism);
  if (workers == 1) {
    for (std::size_t k = 0; k < tasks.size(); ++k) worker_body(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (true) {
          const std::size_t k = next.fetch_add(1);
          if (k >= tasks.size()) break;
          worker_body(k);
        }
      });
    }
    for (std::thread& th : pool) th.join();
  }

  for (std::size_t k = 0; k < tasks.size(); ++k) {
    SweepRow& row = rows[tasks[k].row];
    const Outcome& out = outcomes[k];
    row.runs++;
    if (out.generation_failed) {
      row.generation_failures++;
      continue;
    }
    row.total_violations += out.total;
    row.agent_agent_violations += out.agent_agent;
    row.agent_obstacle_violations += out.agent_obstacle;
    if (out.all_reached) row.runs_all_reached++;
  }
  return rows;
}

}  // namespace quadswarm
