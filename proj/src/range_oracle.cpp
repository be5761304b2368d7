#include "quadswarm/range_oracle.hpp"

#include <cmath>

namespace quadswarm {

namespace {

ScenarioConfig swap_config(const OracleProblem& problem, double range) {
  ScenarioConfig cfg = problem.base;
  cfg.n_agents = 2;
  cfg.n_obstacles = 0;
  cfg.params.v_max = problem.v_max;
  cfg.r_dd = range;
  cfg.r_ddo = std::numeric_limits<double>::infinity();
  const double half = problem.leg_length / 2.0;
  const double z = 1.25;
  cfg.fixed_starts = {{-half, 0.0, z}, {half, 0.0, z}};
  cfg.fixed_goals = {{half, 0.0, z}, {-half, 0.0, z}};
  cfg.fixed_obstacles.clear();
  cfg.back_and_forth_cycles = 0;
  // Covers the full crossing at the probe speed plus braking margin.
  const double quintic_duration = (15.0 / 8.0) * problem.leg_length / problem.v_max;
  cfg.sim_duration = quintic_duration + 10.0;
  return cfg;
}

}  // namespace

ProbeRecord probe_swap_range(const OracleProblem& problem, double range) {
  const ScenarioConfig cfg = swap_config(problem, range);
  const double threshold = cfg.margins.d_s + 2.0 * cfg.params.radius;

  Simulator sim(cfg);
  ProbeRecord rec;
  rec.range = range;
  rec.min_distance = std::numeric_limits<double>::infinity();

  const int max_steps =
      static_cast<int>(std::ceil(cfg.sim_duration / cfg.control_dt + 1e-9));
  bool encountered = false;
  for (int k = 0; k < max_steps; ++k) {
    sim.step();
    const double d = (sim.world().states[0].p - sim.world().states[1].p).norm();
    rec.min_distance = std::min(rec.min_distance, d);
    if (d < threshold) {
      rec.violated = true;
      return rec;
    }
    if (d <= range) encountered = true;
    // Once both vehicles have met and settled, the transient that the bound
    // covers is over; a symmetric pair can only creep toward the boundary
    // asymptotically from here.
    if (encountered && sim.world().states[0].v.norm() < 0.05 &&
        sim.world().states[1].v.norm() < 0.05 && sim.time() > 2.0) {
      break;
    }
    if (sim.all_captured()) break;
  }
  return rec;
}

OracleResult min_range_oracle(const OracleProblem& problem) {
  OracleResult result;
  const double floor =
      problem.base.margins.d_s + 2.0 * problem.base.params.radius;

  if (problem.v_max <= 0.0) {
    result.min_safe_range = floor;
    result.bracketed = false;
    return result;
  }

  // Lower bracket: activation exactly at the safety distance.
  double lo = floor;
  ProbeRecord lo_probe = probe_swap_range(problem, lo);
  result.log.push_back(lo_probe);
  result.probes++;
  if (!lo_probe.violated) {
    result.min_safe_range = floor;
    result.bracketed = false;
    return result;
  }

  // Upper bracket: start at the discretized conservative bound and widen if needed.
  RangeBoundInputs inputs;
  inputs.gains = problem.base.gains;
  inputs.geom = {problem.base.margins.d_s, problem.base.params.radius,
                 problem.base.params.radius};
  inputs.a_max_i = problem.base.params.a_max;
  inputs.v_rel_max = 2.0 * problem.v_max;
  double hi = discretize_bound(conservative_bound(inputs).bound,
                               problem.base.control_dt, inputs.v_rel_max) +
              0.5;
  while (true) {
    ProbeRecord hp = probe_swap_range(problem, hi);
    result.log.push_back(hp);
    result.probes++;
    if (!hp.violated) break;
    hi *= 1.5;
    if (hi > problem.leg_length)
      throw std::runtime_error("range oracle: no safe range below the leg length");
  }

  while (hi - lo > problem.tolerance) {
    const double mid = 0.5 * (lo + hi);
    ProbeRecord probe = probe_swap_range(problem, mid);
    result.log.push_back(probe);
    result.probes++;
    if (probe.violated)
      lo = mid;
    else
      hi = mid;
  }
  result.min_safe_range = hi;
  result.bracketed = true;
  return result;
}

}  // namespace quadswarm
