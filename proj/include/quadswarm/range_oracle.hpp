#pragma once

#include "quadswarm/range_bounds.hpp"
#include "quadswarm/sim.hpp"

namespace quadswarm {

/// Head-on position-swap probe: how small can the detection range get before
/// the safety distance is violated? Independent of the closed forms; this is
/// the validation oracle.
struct OracleProblem {
  ScenarioConfig base;       // vehicle, gains, margins, controller settings
  double v_max = 1.5;        // m/s, probe speed (overrides base.params.v_max)
  double leg_length = 15.0;  // m, straight run-up so the crossing happens near peak speed
  double tolerance = 0.05;   // m, bisection width
};

struct ProbeRecord {
  double range = 0.0;
  bool violated = false;
  double min_distance = 0.0;
};

struct OracleResult {
  double min_safe_range = 0.0;
  bool bracketed = false;  // false: no violation even at the safety distance
  int probes = 0;
  std::vector<ProbeRecord> log;
};

/// Bisection over the agent-agent detection range of a two-vehicle swap.
/// Returns the smallest range (within tolerance) with no barrier violation.
OracleResult min_range_oracle(const OracleProblem& problem);

/// One probe: true if the safety distance is violated at any control step.
ProbeRecord probe_swap_range(const OracleProblem& problem, double range);

}  // namespace quadswarm
